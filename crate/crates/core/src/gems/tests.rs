use super::*;
use crate::raster::{draw_closed_polyline, GridDims};
use crate::synth::{synth_circles, SynthSpec};

fn dims(n: usize) -> GridDims {
    GridDims::new(n, n).unwrap()
}

fn square(d: GridDims, lo: i64, hi: i64) -> ContourImage {
    let mut c = ContourImage::empty(d);
    draw_closed_polyline(&mut c, &[(lo, lo), (lo, hi), (hi, hi), (hi, lo)]);
    c
}

fn circles(n: usize, seed: u64) -> Vec<ContourImage> {
    let spec = SynthSpec {
        dims: dims(96),
        circles: n,
        radius: 28.0,
        outliers: 0,
        seed,
        ..SynthSpec::default()
    };
    synth_circles(&spec).unwrap().pool(0)
}

#[test]
fn identical_inputs_return_themselves() {
    let c = square(dims(40), 8, 30);
    let r = gems_median(&[c.clone(), c.clone(), c.clone()], &GemsConfig::median(3.0)).unwrap();
    assert!(r.per_input_distance.iter().all(|d| d.symmetric <= 1.0), "{:?}", r.per_input_distance);
    assert_eq!(r.total_cost, contour_cost(&r.contour, &accumulate(&[c.clone(), c.clone(), c], AccumulationMode::Linear).unwrap()).unwrap().raw);
}

#[test]
fn result_stays_inside_hull() {
    let input = circles(5, 3);
    let (r, trace) = run_traced(&input, None, &GemsConfig::median(5.0)).unwrap();
    let hull = trace.hull.unwrap();
    assert!(r.contour.pixels().all(|p| hull.get(p)));
    assert!(r.diagnostics.marker_count >= 2);
}

#[test]
fn permutation_invariant() {
    let mut input = circles(6, 4);
    let a = gems_median(&input, &GemsConfig::median(5.0)).unwrap();
    input.reverse();
    input.swap(1, 4);
    let b = gems_median(&input, &GemsConfig::median(5.0)).unwrap();
    assert_eq!(a.contour, b.contour);
    assert_eq!(a.total_cost.to_bits(), b.total_cost.to_bits());
}

#[test]
fn duplicating_inputs_with_doubled_height() {
    let input = circles(4, 5);
    let twice: Vec<ContourImage> = input.iter().chain(&input).cloned().collect();
    let a = gems_median(&input, &GemsConfig::median(4.0)).unwrap();
    let b = gems_median(&twice, &GemsConfig::median(8.0)).unwrap();
    assert_eq!(a.contour, b.contour);
}

#[test]
fn isometries_commute() {
    let input = circles(5, 6);
    let cfg = GemsConfig::median(5.0);
    let base = gems_median(&input, &cfg).unwrap().contour;
    let ops: [fn(&ContourImage) -> ContourImage; 4] = [
        |c| c.rot90(),
        |c| c.rot180(),
        |c| c.flip_horizontal(),
        |c| c.transpose(),
    ];
    for op in ops {
        let moved: Vec<ContourImage> = input.iter().map(op).collect();
        assert_eq!(gems_median(&moved, &cfg).unwrap().contour, op(&base));
    }
    let shifted: Vec<ContourImage> = input.iter().map(|c| c.translate(3, -2).unwrap()).collect();
    assert_eq!(gems_median(&shifted, &cfg).unwrap().contour, base.translate(3, -2).unwrap());
}

#[test]
fn huge_height_has_no_cohesive_median() {
    let input = circles(3, 7);
    assert!(matches!(
        gems_median(&input, &GemsConfig::median(1e9)),
        Err(Error::NoCohesiveMedian { .. })
    ));
}

#[test]
fn mean_mode_runs_on_squared_field() {
    let input = circles(5, 8);
    let r = gems_mean(&input, &GemsConfig::median(50.0)).unwrap();
    assert_eq!(r.mode, ShapeMode::Mean);
    assert!(r.per_input_distance.iter().all(|d| d.symmetric < 6.0));
}

#[test]
fn input_validation() {
    let c = square(dims(40), 8, 30);
    let other = square(dims(41), 8, 30);
    assert!(matches!(gems_median(&[], &GemsConfig::median(1.0)), Err(Error::EmptyInput)));
    assert!(matches!(
        gems_median(&[c.clone(), other], &GemsConfig::median(1.0)),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(matches!(
        gems_median(&[c.clone(), ContourImage::empty(dims(40))], &GemsConfig::median(1.0)),
        Err(Error::EmptyContour)
    ));
    assert!(gems_median(&[c.clone()], &GemsConfig::median(0.0)).is_err());
    let bad = GemsConfig {
        edge_count_threshold: 0.0,
        ..GemsConfig::median(1.0)
    };
    assert!(gems_median(&[c], &bad).is_err());
}

#[test]
fn audit_of_identity_is_one() {
    let input = circles(5, 9);
    let (r, trace) = run_traced(&input, None, &GemsConfig::median(5.0)).unwrap();
    let report = local_optimality_audit(&r, &trace.accumulated, 0, 1).unwrap();
    assert_eq!(report.ratio(), 1.0);
    let same = perturb(&r.contour, &Perturbation::Identity).unwrap();
    assert_eq!(contour_cost(&same, &trace.accumulated).unwrap().normalized, r.normalized_cost);
}
