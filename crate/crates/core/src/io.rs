//! Plain-text artifact formats.
//!
//! Every file starts with `# key=value` metadata lines, followed by a CSV
//! header line and the data rows.

use std::io::{self, BufRead, Write};

use crate::branching::RunResult;
use crate::scalar::Scalar;
use crate::stable::StableParams;
use crate::supremum::{ExpPairCloud, ExpPairSample};
use crate::tabulated::TabulatedFn;

/// Ordered `key=value` metadata.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metadata(pub Vec<(String, String)>);

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn write(&self, w: &mut impl Write) -> io::Result<()> {
        for (k, v) in &self.0 {
            writeln!(w, "# {k}={v}")?;
        }
        Ok(())
    }
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Splits a file into metadata and data rows (the CSV header is dropped).
fn read_table(r: impl BufRead, columns: usize) -> io::Result<(Metadata, Vec<Vec<String>>)> {
    let mut meta = Metadata::new();
    let mut rows = Vec::new();
    let mut header_seen = false;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.0.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        if fields.len() != columns {
            return Err(invalid(format!("expected {columns} columns, got `{line}`")));
        }
        rows.push(fields);
    }
    Ok((meta, rows))
}

fn parse<T: Scalar>(field: &str) -> io::Result<T> {
    field
        .parse::<f64>()
        .map(T::lit)
        .map_err(|_| invalid(format!("not a number: `{field}`")))
}

/// Writes equal-length numeric columns under `names`.
pub fn write_columns<T: Scalar>(
    w: &mut impl Write,
    meta: &Metadata,
    names: &[&str],
    columns: &[&[T]],
) -> io::Result<()> {
    assert_eq!(names.len(), columns.len());
    let rows = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == rows), "ragged columns");
    meta.write(w)?;
    writeln!(w, "{}", names.join(","))?;
    for r in 0..rows {
        for (i, c) in columns.iter().enumerate() {
            if i > 0 {
                write!(w, ",")?;
            }
            write!(w, "{:e}", c[r])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_tabulated<T: Scalar>(
    w: &mut impl Write,
    f: &TabulatedFn<T>,
    meta: &Metadata,
    columns: (&str, &str),
) -> io::Result<()> {
    write_columns(w, meta, &[columns.0, columns.1], &[f.xs(), f.ys()])
}

pub fn read_tabulated<T: Scalar>(r: impl BufRead) -> io::Result<(Metadata, TabulatedFn<T>)> {
    let (meta, rows) = read_table(r, 2)?;
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for row in rows {
        xs.push(parse(&row[0])?);
        ys.push(parse(&row[1])?);
    }
    let f = TabulatedFn::new(xs, ys).map_err(|e| invalid(e.to_string()))?;
    Ok((meta, f))
}

pub fn write_cloud<T: Scalar>(w: &mut impl Write, cloud: &ExpPairCloud<T>, meta: &Metadata) -> io::Result<()> {
    let p = cloud.params();
    let meta = meta
        .clone()
        .with("alpha", p.alpha())
        .with("beta", p.beta())
        .with("n_steps", cloud.n_steps())
        .with("seed", cloud.seed());
    meta.write(w)?;
    writeln!(w, "e,l,s")?;
    for s in cloud.samples() {
        writeln!(w, "{:e},{:e},{:e}", s.e, s.l, s.s)?;
    }
    Ok(())
}

pub fn read_cloud<T: Scalar>(r: impl BufRead) -> io::Result<(Metadata, ExpPairCloud<T>)> {
    let (meta, rows) = read_table(r, 3)?;
    let field = |k: &str| meta.get(k).ok_or_else(|| invalid(format!("missing `{k}` in header")));
    let params = StableParams::new(parse::<T>(field("alpha")?)?, parse::<T>(field("beta")?)?)
        .map_err(|e| invalid(e.to_string()))?;
    let n_steps = field("n_steps")?.parse().map_err(|_| invalid("bad n_steps"))?;
    let seed = field("seed")?.parse().map_err(|_| invalid("bad seed"))?;
    let samples = rows
        .iter()
        .map(|r| {
            Ok(ExpPairSample {
                e: parse(&r[0])?,
                l: parse(&r[1])?,
                s: parse(&r[2])?,
            })
        })
        .collect::<io::Result<Vec<_>>>()?;
    let cloud = ExpPairCloud::from_samples(params, samples, n_steps, seed).map_err(|e| invalid(e.to_string()))?;
    Ok((meta, cloud))
}

pub fn write_runs<T: Scalar>(w: &mut impl Write, runs: &[RunResult<T>], meta: &Metadata) -> io::Result<()> {
    meta.write(w)?;
    writeln!(w, "max,extinct,particles,truncated")?;
    for r in runs {
        writeln!(
            w,
            "{:e},{},{},{}",
            r.max, r.extinct as u8, r.particles, r.truncated as u8
        )?;
    }
    Ok(())
}

pub fn read_runs<T: Scalar>(r: impl BufRead) -> io::Result<(Metadata, Vec<RunResult<T>>)> {
    let (meta, rows) = read_table(r, 4)?;
    let flag = |f: &str| match f {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(invalid(format!("bad flag `{f}`"))),
    };
    let runs = rows
        .iter()
        .map(|r| {
            Ok(RunResult {
                max: parse(&r[0])?,
                extinct: flag(&r[1])?,
                particles: r[2].parse().map_err(|_| invalid("bad particle count"))?,
                truncated: flag(&r[3])?,
            })
        })
        .collect::<io::Result<Vec<_>>>()?;
    Ok((meta, runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supremum::sample_cloud;
    use proptest::prelude::*;

    #[test]
    fn cloud_round_trip() {
        let p = StableParams::new(1.5, 0.0).unwrap();
        let cloud = sample_cloud(&p, 4, 50, 3).unwrap();
        let mut buf = Vec::new();
        write_cloud(&mut buf, &cloud, &Metadata::new().with("tool", "x")).unwrap();
        let (meta, back) = read_cloud::<f64>(buf.as_slice()).unwrap();
        assert_eq!(meta.get("tool"), Some("x"));
        assert_eq!(back, cloud);
    }

    #[test]
    fn rejects_malformed_rows() {
        let text = "# a=1\nx,y\n0,1\n1\n";
        assert!(read_tabulated::<f64>(text.as_bytes()).is_err());
        let text = "x,y\n0,1\n1,zz\n";
        assert!(read_tabulated::<f64>(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn tabulated_and_runs_round_trip(
            ys in prop::collection::vec(0.0f64..1.0, 1..40),
            maxima in prop::collection::vec((0.0f64..1e9, any::<bool>(), 1u64..1_000_000), 1..40),
        ) {
            let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64 * 0.37).collect();
            let f = TabulatedFn::new(xs, ys).unwrap();
            let mut buf = Vec::new();
            write_tabulated(&mut buf, &f, &Metadata::new().with("k", 1), ("x", "y")).unwrap();
            let (_, back) = read_tabulated::<f64>(buf.as_slice()).unwrap();
            prop_assert_eq!(back, f);

            let runs: Vec<RunResult<f64>> = maxima
                .iter()
                .map(|&(max, truncated, particles)| RunResult { max, extinct: !truncated, particles, truncated })
                .collect();
            let mut buf = Vec::new();
            write_runs(&mut buf, &runs, &Metadata::new()).unwrap();
            let (_, back) = read_runs::<f64>(buf.as_slice()).unwrap();
            prop_assert_eq!(back, runs);
        }
    }
}
