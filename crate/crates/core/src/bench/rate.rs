use std::io::Read;

use crate::error::{Error, Result};

/// Least-squares slope of `log(criterion)` against `log(K)` over `k_from <= K <= k_to`.
/// Nonpositive or non-finite criterion values are dropped; at least 10 points must remain.
pub fn fit_rate(points: &[(f64, f64)], k_from: f64, k_to: f64) -> Result<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(k, c)| *k >= k_from && *k <= k_to && *k > 0.0 && *c > 0.0 && c.is_finite())
        .map(|(k, c)| (k.ln(), c.ln()))
        .collect();
    if logs.len() < 10 {
        return Err(Error::invalid(format!(
            "rate fit needs at least 10 positive points in [{k_from}, {k_to}], found {}",
            logs.len()
        )));
    }
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("rate fit needs at least two distinct K values"));
    }
    Ok(sxy / sxx)
}

/// `(outer_iter, criterion)` pairs from any trace or mean-trace CSV; rows with an
/// empty criterion are skipped.
pub fn rate_points_from_csv<R: Read>(input: R) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing column `{name}`"),
        })
    };
    let (ki, ci) = (col("outer_iter")?, col("criterion")?);
    let mut out = Vec::new();
    for (no, rec) in reader.records().enumerate() {
        let line = no + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse { line, message: format!("`{s}` is not a number") });
        if rec[ci].is_empty() {
            continue;
        }
        out.push((parse(&rec[ki])?, parse(&rec[ci])?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (1..=200).map(|k| (k as f64, f(k as f64))).collect()
    }

    #[test]
    fn exact_power_laws() {
        assert!((fit_rate(&trace(|k| 7.0 / k), 10.0, 200.0).unwrap() + 1.0).abs() < 1e-6);
        assert!((fit_rate(&trace(|k| 3.0 / k.sqrt()), 10.0, 200.0).unwrap() + 0.5).abs() < 1e-6);
    }

    #[test]
    fn scale_invariance() {
        let base = trace(|k| (1.0 + (k * 0.3).sin().abs()) / k);
        let a = fit_rate(&base, 10.0, 200.0).unwrap();
        let scaled: Vec<_> = base.iter().map(|(k, c)| (*k, c * 123.4)).collect();
        assert!((a - fit_rate(&scaled, 10.0, 200.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn drops_nonpositive_and_needs_ten() {
        let mut t = trace(|k| 1.0 / k);
        t[50].1 = -1.0;
        t[60].1 = 0.0;
        assert!((fit_rate(&t, 10.0, 200.0).unwrap() + 1.0).abs() < 1e-9);
        assert!(fit_rate(&t, 1.0, 9.0).is_err());
        let sparse: Vec<_> = t.iter().map(|(k, c)| (*k, if *k > 15.0 { -1.0 } else { *c })).collect();
        assert!(fit_rate(&sparse, 10.0, 200.0).is_err());
    }

    #[test]
    fn reads_csv_columns() {
        let text = "outer_iter,x,criterion\n1,0,0.5\n2,0,\n3,0,0.25\n";
        assert_eq!(rate_points_from_csv(text.as_bytes()).unwrap(), vec![(1.0, 0.5), (3.0, 0.25)]);
        assert!(rate_points_from_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
