//! CSV interchange formats.
//!
//! Every file starts with one `# key=value ...` provenance line, then a
//! header row, then data rows. Readers skip `#` lines.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::{EvalReport, EvalRow, InstanceFeature};
use crate::features::{Feature, VertexScores};
use crate::prediction::{CandidatePolicy, Recommendations};
use crate::segmentation::Partition;

/// Formats `x` with `digits` significant digits in the style of C's `%g`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to the precision that score files carry.
pub fn round_sig10(x: f64) -> f64 {
    fmt_sig(x, 10).parse().expect("formatted float parses")
}

/// Renders `key=value` pairs as a provenance line (without the `# `).
pub fn provenance(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn kv(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

/// First `#` line of a file, without the marker.
pub fn read_provenance(path: impl AsRef<Path>) -> Option<String> {
    let text = std::fs::read_to_string(path).ok()?;
    let first = text.lines().next()?;
    first.strip_prefix("# ").map(str::to_string)
}

fn create(path: impl AsRef<Path>) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(r)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing column {}", i + 1),
    })?;
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{raw}`"),
    })
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

pub fn write_scores<W: Write>(scores: &VertexScores, prov: &str, mut out: W) -> Result<()> {
    writeln!(out, "# {prov}")?;
    writeln!(out, "vertex,score")?;
    for (v, &s) in scores.values.iter().enumerate() {
        writeln!(out, "{v},{}", fmt_sig(s, 10))?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_scores(scores: &VertexScores, prov: &str, path: impl AsRef<Path>) -> Result<()> {
    write_scores(scores, prov, create(path)?)
}

/// Reads `vertex,score` rows. Every vertex `0..max` must appear exactly once.
pub fn parse_scores<R: Read>(feature: Feature, r: R) -> Result<VertexScores> {
    let mut pairs = Vec::new();
    for rec in reader(r).records() {
        let rec = rec?;
        let line = line_of(&rec);
        pairs.push((
            field::<usize>(&rec, 0, line)?,
            field::<f64>(&rec, 1, line)?,
            line,
        ));
    }
    let n = pairs.iter().map(|p| p.0 + 1).max().unwrap_or(0);
    let mut values = vec![None; n];
    for (v, s, line) in pairs {
        if values[v].replace(s).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate vertex {v}"),
            });
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(v, s)| s.ok_or_else(|| Error::Degenerate(format!("no score for vertex {v}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(VertexScores { feature, values })
}

pub fn load_scores(feature: Feature, path: impl AsRef<Path>) -> Result<VertexScores> {
    parse_scores(feature, File::open(path)?)
}

pub fn write_partition<W: Write>(p: &Partition, prov: &str, mut out: W) -> Result<()> {
    writeln!(out, "# {prov}")?;
    writeln!(out, "vertex,cluster")?;
    for (v, &c) in p.assignment.iter().enumerate() {
        writeln!(out, "{v},{c}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_partition(p: &Partition, prov: &str, path: impl AsRef<Path>) -> Result<()> {
    write_partition(p, prov, create(path)?)
}

/// Reads `vertex,cluster` rows; `k` is one more than the largest cluster id.
pub fn parse_partition<R: Read>(r: R) -> Result<Partition> {
    let mut pairs = Vec::new();
    for rec in reader(r).records() {
        let rec = rec?;
        let line = line_of(&rec);
        pairs.push((
            field::<usize>(&rec, 0, line)?,
            field::<usize>(&rec, 1, line)?,
        ));
    }
    let n = pairs.iter().map(|p| p.0 + 1).max().unwrap_or(0);
    let k = pairs.iter().map(|p| p.1 + 1).max().unwrap_or(0);
    let mut assignment = vec![None; n];
    for (v, c) in pairs {
        if assignment[v].replace(c).is_some() {
            return Err(Error::Degenerate(format!("vertex {v} assigned twice")));
        }
    }
    let assignment = assignment
        .into_iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| Error::Degenerate(format!("vertex {v} has no cluster"))))
        .collect::<Result<Vec<_>>>()?;
    Partition::from_assignment(k, assignment)
}

pub fn load_partition(path: impl AsRef<Path>) -> Result<Partition> {
    parse_partition(File::open(path)?)
}

pub fn write_recommendations<W: Write>(
    recs: &Recommendations,
    prov: &str,
    mut out: W,
) -> Result<()> {
    writeln!(out, "# {prov}")?;
    writeln!(out, "target,rank,candidate,score")?;
    for (u, list) in recs.lists.iter().enumerate() {
        for (rank, &(v, s)) in list.iter().enumerate() {
            writeln!(out, "{u},{},{v},{}", rank + 1, fmt_sig(s, 10))?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_recommendations(
    recs: &Recommendations,
    prov: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_recommendations(recs, prov, create(path)?)
}

/// Reads `target,rank,candidate,score` rows. Ranks of each target must run
/// 1, 2, 3, ... in any row order.
pub fn parse_recommendations<R: Read>(r: R) -> Result<Recommendations> {
    let mut rows: Vec<(usize, usize, usize, f64, usize)> = Vec::new();
    for rec in reader(r).records() {
        let rec = rec?;
        let line = line_of(&rec);
        rows.push((
            field(&rec, 0, line)?,
            field(&rec, 1, line)?,
            field(&rec, 2, line)?,
            field(&rec, 3, line)?,
            line,
        ));
    }
    rows.sort_by_key(|r| (r.0, r.1));
    let n = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
    let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (u, rank, v, s, line) in rows {
        if rank != lists[u].len() + 1 {
            return Err(Error::Parse {
                line,
                message: format!(
                    "target {u}: expected rank {}, found {rank}",
                    lists[u].len() + 1
                ),
            });
        }
        lists[u].push((v, s));
    }
    let top_n = lists.iter().map(Vec::len).max().unwrap_or(0);
    Ok(Recommendations {
        lists,
        scorer: "file".into(),
        policy: CandidatePolicy::IntraCluster,
        top_n,
    })
}

pub fn load_recommendations(path: impl AsRef<Path>) -> Result<Recommendations> {
    parse_recommendations(File::open(path)?)
}

pub fn write_report<W: Write>(report: &EvalReport, mut out: W) -> Result<()> {
    writeln!(out, "# {}", provenance(&report.config))?;
    writeln!(out, "N,precision,recall")?;
    for EvalRow {
        n,
        precision,
        recall,
    } in &report.rows
    {
        writeln!(
            out,
            "{n},{},{}",
            fmt_sig(*precision, 10),
            fmt_sig(*recall, 10)
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_report(report: &EvalReport, path: impl AsRef<Path>) -> Result<()> {
    write_report(report, create(path)?)
}

/// Reads an `N,precision,recall` table back; the provenance line becomes the
/// config echo.
pub fn load_report(path: impl AsRef<Path>) -> Result<EvalReport> {
    let path = path.as_ref();
    let config: Vec<(String, String)> = read_provenance(path)
        .map(|line| {
            line.split_whitespace()
                .filter_map(|kv| kv.split_once('='))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect()
        })
        .unwrap_or_default();
    let mut rows = Vec::new();
    for rec in reader(File::open(path)?).records() {
        let rec = rec?;
        let line = line_of(&rec);
        rows.push(EvalRow {
            n: field(&rec, 0, line)?,
            precision: field(&rec, 1, line)?,
            recall: field(&rec, 2, line)?,
        });
    }
    let targets = config
        .iter()
        .find(|(k, _)| k == "targets")
        .and_then(|(_, v)| v.parse().ok())
        .unwrap_or(0);
    Ok(EvalReport {
        rows,
        targets,
        config,
    })
}

pub fn write_infogain<W: Write>(
    ranked: &[(InstanceFeature, f64)],
    prov: &str,
    mut out: W,
) -> Result<()> {
    writeln!(out, "# {prov}")?;
    writeln!(out, "feature,infogain")?;
    for (f, ig) in ranked {
        writeln!(out, "{f},{}", fmt_sig(*ig, 10))?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_infogain(
    ranked: &[(InstanceFeature, f64)],
    prov: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_infogain(ranked, prov, create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(std::f64::consts::FRAC_1_SQRT_2, 10), "0.7071067812");
        assert_eq!(fmt_sig(1.0, 10), "1");
        assert_eq!(fmt_sig(1.0 / 3.0, 10), "0.3333333333");
        assert_eq!(fmt_sig(123456.789, 10), "123456.789");
        assert_eq!(fmt_sig(1.5e-7, 10), "1.5e-7");
        assert_eq!(fmt_sig(0.0001234, 3), "0.000123");
        assert_eq!(fmt_sig(12345678901.0, 10), "1.23456789e10");
        assert_eq!(fmt_sig(0.0, 10), "0");
        assert_eq!(fmt_sig(-2.5, 10), "-2.5");
    }

    #[test]
    fn rounding_is_idempotent() {
        for x in [0.1, 1.0 / 7.0, 2f64.sqrt(), 1e-9 / 3.0, 12345.6789012345] {
            let r = round_sig10(x);
            assert_eq!(round_sig10(r), r);
            assert!((r - x).abs() <= x.abs() * 1e-9);
        }
    }

    #[test]
    fn scores_round_trip() {
        let s = VertexScores {
            feature: Feature::Degree,
            values: vec![0.5, 1.0, 0.25],
        };
        let mut buf = Vec::new();
        write_scores(&s, "x=1", &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("# x=1\nvertex,score\n"));
        assert_eq!(parse_scores(Feature::Degree, buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn scores_need_every_vertex() {
        let text = "vertex,score\n0,1\n2,0.5\n";
        assert!(parse_scores(Feature::Degree, text.as_bytes()).is_err());
        let text = "vertex,score\n0,1\n0,0.5\n";
        assert!(parse_scores(Feature::Degree, text.as_bytes()).is_err());
        let text = "vertex,score\n0,abc\n";
        assert!(matches!(
            parse_scores(Feature::Degree, text.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn partition_round_trip() {
        let p = Partition::from_assignment(3, vec![2, 0, 1, 1]).unwrap();
        let mut buf = Vec::new();
        write_partition(&p, "k=3", &mut buf).unwrap();
        assert_eq!(parse_partition(buf.as_slice()).unwrap(), p);
    }

    #[test]
    fn recommendations_round_trip_ids() {
        let recs = Recommendations {
            lists: vec![vec![(2, 0.5), (1, 0.25)], vec![], vec![(0, 1.0)]],
            scorer: "degree".into(),
            policy: CandidatePolicy::IntraCluster,
            top_n: 2,
        };
        let mut buf = Vec::new();
        write_recommendations(&recs, "p", &mut buf).unwrap();
        let back = parse_recommendations(buf.as_slice()).unwrap();
        assert_eq!(back.lists, recs.lists);
    }

    #[test]
    fn recommendation_ranks_must_be_contiguous() {
        let text = "target,rank,candidate,score\n0,1,3,0.5\n0,3,4,0.1\n";
        assert!(parse_recommendations(text.as_bytes()).is_err());
    }
}
