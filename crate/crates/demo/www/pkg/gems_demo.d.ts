/* tslint:disable */
/* eslint-disable */

/**
 * A rendered view plus a line of text describing it.
 */
export class Frame {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    rgba(): Uint8Array;
    readonly height: number;
    readonly info: string;
    readonly width: number;
}

/**
 * Accumulated distance field in gray, its h-minima basins tinted, and the median line in red.
 */
export function basin_view(h: number, outliers: number, seed: number): Frame;

/**
 * Consensus of cell-grid segmentations (green) over the tile, with the
 * segmentations in dark gray and any scribble pixels in orange.
 */
export function consensus_view(h: number, segmentations: number, scribbles: number, edge_count_threshold: number, seed: number): Frame;

/**
 * Median (red) and mean (blue) of nine circles plus `outliers` outliers (gray).
 */
export function outlier_overlay(outliers: number, seed: number): Frame;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_frame_free: (a: number, b: number) => void;
    readonly basin_view: (a: number, b: number, c: number) => number;
    readonly consensus_view: (a: number, b: number, c: number, d: number, e: number) => number;
    readonly frame_height: (a: number) => number;
    readonly frame_info: (a: number) => [number, number];
    readonly frame_rgba: (a: number) => [number, number];
    readonly frame_width: (a: number) => number;
    readonly outlier_overlay: (a: number, b: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
