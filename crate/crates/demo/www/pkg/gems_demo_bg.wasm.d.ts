/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_frame_free: (a: number, b: number) => void;
export const basin_view: (a: number, b: number, c: number) => number;
export const consensus_view: (a: number, b: number, c: number, d: number, e: number) => number;
export const frame_height: (a: number) => number;
export const frame_info: (a: number) => [number, number];
export const frame_rgba: (a: number) => [number, number];
export const frame_width: (a: number) => number;
export const outlier_overlay: (a: number, b: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
