//! Plot data: ξ_i, π_i and the recursion polygon projected onto two coordinates.
//!
//! Rows are `kind,index,u,v`. An `edge` row with index i holds π_{i+1} (π_1 for
//! i = N), the far end of the edge that starts at the `pi` row with the same index.

use std::io::Write;

use ocn_core::verify::certificate::ConfigurationRecord;
use serde::Serialize;

#[derive(Debug, PartialEq, Serialize)]
pub struct Row {
    pub kind: &'static str,
    pub index: usize,
    pub u: f64,
    pub v: f64,
}

/// Rows for the 1-based pieces `from..=to`, coordinates `u` and `v` (0-based).
pub fn rows(conf: &ConfigurationRecord, from: usize, to: usize, u: usize, v: usize) -> Result<Vec<Row>, String> {
    let big_n = conf.xi.len();
    if big_n == 0 || conf.pi.len() != big_n {
        return Err("configuration has mismatched xi and pi lists".into());
    }
    if from < 1 || to > big_n || from > to {
        return Err(format!("piece range {from}..={to} outside 1..={big_n}"));
    }
    let dim = conf.xi[0].len();
    if u >= dim || v >= dim {
        return Err(format!("coordinates {u}, {v} outside 0..{dim}"));
    }
    let at = |p: &Vec<f64>| (p[u], p[v]);
    let mut out = Vec::with_capacity(3 * (to - from + 1));
    for (kind, pts) in [("xi", &conf.xi), ("pi", &conf.pi)] {
        for i in from..=to {
            let (a, b) = at(&pts[i - 1]);
            out.push(Row { kind, index: i, u: a, v: b });
        }
    }
    for i in from..=to {
        let (a, b) = at(&conf.pi[i % big_n]);
        out.push(Row { kind: "edge", index: i, u: a, v: b });
    }
    Ok(out)
}

pub fn write_csv<W: Write>(w: W, rows: &[Row]) -> Result<(), String> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(|e| e.to_string())?;
    }
    wr.flush().map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConfigurationRecord {
        let pi = vec![vec![0.0, 0.0, 5.0], vec![1.0, 0.0, 5.0], vec![1.0, 1.0, 5.0], vec![0.0, 1.0, 5.0]];
        let xi = pi.iter().map(|p| p.iter().map(|x| 2.0 * x).collect()).collect();
        ConfigurationRecord { xi, pi, chi: vec![0.5; 4] }
    }

    #[test]
    fn edges_close_the_cycle() {
        let r = rows(&square(), 1, 4, 0, 1).unwrap();
        assert_eq!(r.len(), 12);
        let last = r.last().unwrap();
        assert_eq!((last.kind, last.index, last.u, last.v), ("edge", 4, 0.0, 0.0));
    }

    #[test]
    fn identical_coordinates_are_collinear() {
        let r = rows(&square(), 1, 4, 1, 1).unwrap();
        assert!(r.iter().all(|x| x.u == x.v));
        let mut buf = Vec::new();
        write_csv(&mut buf, &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("kind,index,u,v\n"));
        assert_eq!(text.lines().count(), 13);
    }

    #[test]
    fn bad_ranges_are_errors() {
        assert!(rows(&square(), 0, 4, 0, 1).is_err());
        assert!(rows(&square(), 1, 5, 0, 1).is_err());
        assert!(rows(&square(), 1, 4, 0, 3).is_err());
    }
}
