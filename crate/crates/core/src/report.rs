//! CSV outputs. Every real number is written with six decimals.

use std::io::Write;

use crate::error::Result;
use crate::gems::MedianResult;
use crate::harness::EvalRow;
use crate::metrics::CurveDistance;

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

fn optional(v: Option<f64>) -> String {
    v.map(fixed).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRow {
    pub source: String,
    pub target: String,
    pub distance: CurveDistance,
}

/// `source,target,forward,backward,symmetric`
pub fn write_distances<W: Write>(out: W, rows: &[DistanceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "target", "forward", "backward", "symmetric"])?;
    for r in rows {
        let d = &r.distance;
        w.write_record([
            r.source.clone(),
            r.target.clone(),
            fixed(d.forward),
            fixed(d.backward),
            fixed(d.symmetric),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `input,forward,backward,symmetric` per input, then `TOTAL,,,<normalized cost>`.
///
/// Forward is from the result to the input.
pub fn write_summary<W: Write>(out: W, names: &[String], result: &MedianResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["input", "forward", "backward", "symmetric"])?;
    for (name, d) in names.iter().zip(&result.per_input_distance) {
        w.write_record([name.clone(), fixed(d.forward), fixed(d.backward), fixed(d.symmetric)])?;
    }
    w.write_record(["TOTAL".to_string(), String::new(), String::new(), fixed(result.normalized_cost)])?;
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `k,d_median,d_mean`; a failed run leaves its cell empty.
pub fn write_eval<W: Write>(out: W, rows: &[EvalRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "d_median", "d_mean"])?;
    for r in rows {
        w.write_record([r.k.to_string(), optional(r.d_median), optional(r.d_mean)])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub filename: String,
    pub kind: String,
    pub seed_offset: u64,
}

/// `filename,kind,seed_offset`
pub fn write_manifest<W: Write>(out: W, entries: &[ManifestEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["filename", "kind", "seed_offset"])?;
    for e in entries {
        w.write_record([e.filename.clone(), e.kind.clone(), e.seed_offset.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn distances_schema() {
        let rows = [DistanceRow {
            source: "a.pbm".into(),
            target: "b, c.pbm".into(),
            distance: CurveDistance {
                forward: 1.0,
                backward: 2.5,
                symmetric: 1.75,
            },
        }];
        let s = text(|b| write_distances(b, &rows));
        assert_eq!(
            s,
            "source,target,forward,backward,symmetric\na.pbm,\"b, c.pbm\",1.000000,2.500000,1.750000\n"
        );
    }

    #[test]
    fn eval_schema_with_failure() {
        let rows = [
            EvalRow {
                k: 0,
                d_median: Some(0.0),
                d_mean: Some(0.0),
                error: None,
            },
            EvalRow {
                k: 1,
                d_median: Some(0.25),
                d_mean: None,
                error: Some("no cohesive median".into()),
            },
        ];
        let s = text(|b| write_eval(b, &rows));
        assert_eq!(s, "k,d_median,d_mean\n0,0.000000,0.000000\n1,0.250000,\n");
    }

    #[test]
    fn manifest_schema() {
        let e = [ManifestEntry {
            filename: "circle_000.pbm".into(),
            kind: "circle".into(),
            seed_offset: 0,
        }];
        assert_eq!(text(|b| write_manifest(b, &e)), "filename,kind,seed_offset\ncircle_000.pbm,circle,0\n");
    }
}
