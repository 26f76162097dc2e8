//! File formats: CSV ingestion with row-accurate errors, plus the CSV/JSON
//! artifacts the CLI emits.
//!
//! Formats:
//! * prices — `hour,price_usd_per_kwh`, `hour` a 0-based contiguous index;
//! * history — `datetime,mw`, ISO-8601 timestamps on an hourly grid;
//! * degradation curve — `soc_percent,cumulative_degradation`, ascending;
//! * schedule output — `hour,power_w,soc_percent,price_usd_per_kwh`;
//! * frontier output — `w_c,cost_usd,degradation,feasible,dominated`.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use chrono::NaiveDateTime;

use crate::battery::{DegradationCurve, Schedule, SocTrajectory};
use crate::cost::PriceScenario;
use crate::error::{Error, Result};
use crate::forecast::{GpPosterior, HourlySeries};
use crate::pareto::{dominance_flags, FrontierPoint};

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text.lines().map(|l| l.trim_end_matches('\r').to_string()).collect())
}

fn expect_header(path: &Path, lines: &[String], expected: &str) -> Result<()> {
    let got = lines
        .first()
        .map(|l| l.trim().trim_start_matches('\u{feff}'))
        .unwrap_or("");
    if got != expected {
        return Err(Error::csv(
            path,
            1,
            format!("expected header `{expected}`, got `{got}`"),
        ));
    }
    Ok(())
}

fn split_fields<'a>(path: &Path, line_no: usize, line: &'a str, n: usize) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != n {
        return Err(Error::csv(
            path,
            line_no,
            format!("expected {n} comma-separated fields, got {}", fields.len()),
        ));
    }
    Ok(fields)
}

fn parse_f64(path: &Path, line_no: usize, name: &str, field: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| {
        Error::csv(path, line_no, format!("{name} `{field}` is not a number"))
    })
}

fn parse_usize(path: &Path, line_no: usize, name: &str, field: &str) -> Result<usize> {
    field.parse::<usize>().map_err(|_| {
        Error::csv(path, line_no, format!("{name} `{field}` is not a non-negative integer"))
    })
}

/// Load a price scenario. Hours must run 0, 1, 2, ... without gaps.
pub fn read_price_csv(path: &Path) -> Result<PriceScenario> {
    let lines = read_lines(path)?;
    expect_header(path, &lines, "hour,price_usd_per_kwh")?;
    let mut prices = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields = split_fields(path, line_no, line, 2)?;
        let hour = parse_usize(path, line_no, "hour", fields[0])?;
        if hour != prices.len() {
            return Err(Error::csv(
                path,
                line_no,
                format!("expected hour {}, got {hour}", prices.len()),
            ));
        }
        let price = parse_f64(path, line_no, "price", fields[1])?;
        if !price.is_finite() {
            return Err(Error::csv(path, line_no, "price must be finite".to_string()));
        }
        prices.push(price);
    }
    if prices.is_empty() {
        return Err(Error::csv(path, 1, "no data rows".to_string()));
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "prices".to_string());
    PriceScenario::new(prices, label)
}

const TIMESTAMP_FORMATS: [&str; 2] = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"];

fn parse_timestamp(path: &Path, line_no: usize, field: &str) -> Result<NaiveDateTime> {
    // Accept an offset-carrying RFC 3339 stamp or a naive local one.
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(field) {
        return Ok(dt.naive_utc());
    }
    for fmt in TIMESTAMP_FORMATS {
        if let Ok(dt) = NaiveDateTime::parse_from_str(field, fmt) {
            return Ok(dt);
        }
    }
    Err(Error::csv(
        path,
        line_no,
        format!("`{field}` is not an ISO-8601 timestamp"),
    ))
}

/// Load hourly usage history. Timestamps become integer hour indices
/// relative to the first row. Gaps are rejected unless `allow_gaps`, in
/// which case the missing hours are simply absent (never imputed).
pub fn read_history_csv(path: &Path, allow_gaps: bool) -> Result<HourlySeries> {
    let lines = read_lines(path)?;
    expect_header(path, &lines, "datetime,mw")?;
    let mut origin: Option<NaiveDateTime> = None;
    let mut hours: Vec<i64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields = split_fields(path, line_no, line, 2)?;
        let stamp = parse_timestamp(path, line_no, fields[0])?;
        let mw = parse_f64(path, line_no, "mw", fields[1])?;
        if !mw.is_finite() || mw < 0.0 {
            return Err(Error::csv(
                path,
                line_no,
                format!("mw must be finite and >= 0, got {mw}"),
            ));
        }
        let origin = *origin.get_or_insert(stamp);
        let seconds = (stamp - origin).num_seconds();
        if seconds % 3600 != 0 {
            return Err(Error::csv(
                path,
                line_no,
                format!("timestamp `{}` is not on the hourly grid of the first row", fields[0]),
            ));
        }
        let hour = seconds / 3600;
        match hours.last() {
            Some(&prev) if hour <= prev => {
                return Err(Error::csv(
                    path,
                    line_no,
                    format!("timestamps must be strictly increasing (hour {hour} after {prev})"),
                ));
            }
            Some(&prev) if hour > prev + 1 && !allow_gaps => {
                return Err(Error::csv(
                    path,
                    line_no,
                    format!(
                        "gap of {} missing hours before this row; pass --allow-gaps to skip gaps",
                        hour - prev - 1
                    ),
                ));
            }
            _ => {}
        }
        hours.push(hour);
        values.push(mw);
    }
    HourlySeries::new(hours, values)
}

/// Load a cumulative degradation curve, reporting the offending row for
/// every invariant violation.
pub fn read_curve_csv(path: &Path) -> Result<DegradationCurve> {
    let lines = read_lines(path)?;
    expect_header(path, &lines, "soc_percent,cumulative_degradation")?;
    let mut knots: Vec<(f64, f64)> = Vec::new();
    let mut last_line_no = 1;
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        last_line_no = line_no;
        let fields = split_fields(path, line_no, line, 2)?;
        let soc = parse_f64(path, line_no, "soc_percent", fields[0])?;
        let delta = parse_f64(path, line_no, "cumulative_degradation", fields[1])?;
        if !soc.is_finite() || !delta.is_finite() {
            return Err(Error::csv(path, line_no, "values must be finite".to_string()));
        }
        if delta < 0.0 {
            return Err(Error::csv(
                path,
                line_no,
                format!("cumulative degradation must be >= 0, got {delta}"),
            ));
        }
        if let Some(&(prev_soc, prev_delta)) = knots.last() {
            if soc <= prev_soc {
                return Err(Error::csv(
                    path,
                    line_no,
                    format!("soc_percent must be strictly increasing ({soc} after {prev_soc})"),
                ));
            }
            if delta < prev_delta {
                return Err(Error::csv(
                    path,
                    line_no,
                    format!(
                        "cumulative degradation must be non-decreasing ({delta} after {prev_delta})"
                    ),
                ));
            }
        } else if soc != 0.0 {
            return Err(Error::csv(
                path,
                line_no,
                format!("the curve must start at soc_percent 0, got {soc}"),
            ));
        }
        knots.push((soc, delta));
    }
    if knots.len() < 2 {
        return Err(Error::csv(path, last_line_no, "needs at least 2 knots".to_string()));
    }
    if knots.last().expect("non-empty").0 != 100.0 {
        return Err(Error::csv(
            path,
            last_line_no,
            format!("the curve must end at soc_percent 100, got {}", knots.last().expect("non-empty").0),
        ));
    }
    DegradationCurve::new(knots)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(contents.as_bytes()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write the optimized schedule next to its trajectory and prices. The
/// SOC column is the state at the end of each interval.
pub fn write_schedule_csv(
    path: &Path,
    schedule: &Schedule,
    trajectory: &SocTrajectory,
    scenario: &PriceScenario,
) -> Result<()> {
    let mut out = String::from("hour,power_w,soc_percent,price_usd_per_kwh\n");
    for (t, &p) in schedule.powers.iter().enumerate() {
        out.push_str(&format!(
            "{t},{p},{},{}\n",
            trajectory.values[t + 1],
            scenario.prices[t]
        ));
    }
    write_file(path, &out)
}

/// Re-ingest a schedule CSV written by [`write_schedule_csv`], returning
/// the schedule and the price scenario it was produced against.
pub fn read_schedule_csv(path: &Path, soc_0: f64) -> Result<(Schedule, PriceScenario)> {
    let lines = read_lines(path)?;
    expect_header(path, &lines, "hour,power_w,soc_percent,price_usd_per_kwh")?;
    let mut powers = Vec::new();
    let mut prices = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields = split_fields(path, line_no, line, 4)?;
        let hour = parse_usize(path, line_no, "hour", fields[0])?;
        if hour != powers.len() {
            return Err(Error::csv(
                path,
                line_no,
                format!("expected hour {}, got {hour}", powers.len()),
            ));
        }
        powers.push(parse_f64(path, line_no, "power_w", fields[1])?);
        prices.push(parse_f64(path, line_no, "price_usd_per_kwh", fields[3])?);
    }
    let schedule = Schedule::new(soc_0, powers)?;
    let scenario = PriceScenario::new(prices, "reingested")?;
    Ok((schedule, scenario))
}

/// Write all sweep points with their dominance flags.
pub fn write_frontier_csv(path: &Path, points: &[FrontierPoint]) -> Result<()> {
    let flags = dominance_flags(points);
    let mut out = String::from("w_c,cost_usd,degradation,feasible,dominated\n");
    for (p, dominated) in points.iter().zip(flags) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.w_c, p.cost, p.degradation, p.feasible, dominated
        ));
    }
    write_file(path, &out)
}

/// Write the posterior mean and variance per target hour.
pub fn write_forecast_csv(path: &Path, post: &GpPosterior) -> Result<()> {
    let mut out = String::from("hour,mean_mw,variance_mw2\n");
    for (i, &h) in post.target_hours.iter().enumerate() {
        out.push_str(&format!("{h},{},{}\n", post.mean[i], post.variance(i)));
    }
    write_file(path, &out)
}

/// Write posterior draws in long form.
pub fn write_samples_csv(path: &Path, post: &GpPosterior, samples: &[Vec<f64>]) -> Result<()> {
    let mut out = String::from("sample,hour,mw\n");
    for (s, draw) in samples.iter().enumerate() {
        for (i, &h) in post.target_hours.iter().enumerate() {
            out.push_str(&format!("{s},{h},{}\n", draw[i]));
        }
    }
    write_file(path, &out)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("artifact types serialize");
    write_file(path, &format!("{text}\n"))
}

/// Write a battery parameter file's worth of curve knots (the inverse of
/// [`read_curve_csv`]); used to export the built-in synthetic curve.
pub fn write_curve_csv(path: &Path, curve: &DegradationCurve) -> Result<()> {
    let mut out = String::from("soc_percent,cumulative_degradation\n");
    for &(soc, delta) in curve.knots() {
        out.push_str(&format!("{soc},{delta}\n"));
    }
    write_file(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::{simulate_soc, BatteryParams};
    use std::io::Write;
    use tempfile::NamedTempFile;

    fn temp_csv(contents: &str) -> NamedTempFile {
        let mut file = NamedTempFile::new().unwrap();
        file.write_all(contents.as_bytes()).unwrap();
        file.flush().unwrap();
        file
    }

    #[test]
    fn price_round_trip() {
        let file = temp_csv("hour,price_usd_per_kwh\n0,0.10\n1,0.25\n2,-0.05\n");
        let scenario = read_price_csv(file.path()).unwrap();
        assert_eq!(scenario.prices, vec![0.10, 0.25, -0.05]);
        assert!(scenario.has_negative());
    }

    #[test]
    fn price_errors_carry_line_numbers() {
        let file = temp_csv("hour,price_usd_per_kwh\n0,0.10\n1,abc\n");
        match read_price_csv(file.path()).unwrap_err() {
            Error::Csv { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected: {other}"),
        }

        let gap = temp_csv("hour,price_usd_per_kwh\n0,0.10\n2,0.2\n");
        match read_price_csv(gap.path()).unwrap_err() {
            Error::Csv { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn bad_header_is_line_one() {
        let file = temp_csv("hr,price\n0,0.10\n");
        match read_price_csv(file.path()).unwrap_err() {
            Error::Csv { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn history_parses_hourly_grid() {
        let file = temp_csv(
            "datetime,mw\n2024-05-01T00:00:00,41000\n2024-05-01T01:00:00,40000\n2024-05-01T02:00:00,39500\n",
        );
        let series = read_history_csv(file.path(), false).unwrap();
        assert_eq!(series.hours, vec![0, 1, 2]);
        assert_eq!(series.values[2], 39500.0);
    }

    #[test]
    fn history_accepts_space_separated_timestamps() {
        let file = temp_csv("datetime,mw\n2024-05-01 00:00:00,1000\n2024-05-01 01:00:00,1200\n");
        let series = read_history_csv(file.path(), false).unwrap();
        assert_eq!(series.hours, vec![0, 1]);
    }

    #[test]
    fn history_gap_handling() {
        let gapped = "datetime,mw\n2024-05-01T00:00:00,1000\n2024-05-01T03:00:00,1200\n";
        let file = temp_csv(gapped);
        match read_history_csv(file.path(), false).unwrap_err() {
            Error::Csv { line, reason, .. } => {
                assert_eq!(line, 3);
                assert!(reason.contains("gap"));
            }
            other => panic!("unexpected: {other}"),
        }
        let series = read_history_csv(file.path(), true).unwrap();
        assert_eq!(series.hours, vec![0, 3]);
    }

    #[test]
    fn history_rejects_off_grid_timestamps() {
        let file = temp_csv("datetime,mw\n2024-05-01T00:00:00,1000\n2024-05-01T00:30:00,1200\n");
        assert!(read_history_csv(file.path(), true).is_err());
    }

    #[test]
    fn curve_round_trip_and_errors() {
        let file = temp_csv("soc_percent,cumulative_degradation\n0,0\n50,0.3\n100,1.0\n");
        let curve = read_curve_csv(file.path()).unwrap();
        assert_eq!(curve.knots().len(), 3);

        let decreasing = temp_csv("soc_percent,cumulative_degradation\n0,0\n60,0.5\n40,0.7\n");
        match read_curve_csv(decreasing.path()).unwrap_err() {
            Error::Csv { line, reason, .. } => {
                assert_eq!(line, 4);
                assert!(reason.contains("strictly increasing"));
            }
            other => panic!("unexpected: {other}"),
        }

        let short = temp_csv("soc_percent,cumulative_degradation\n0,0\n");
        assert!(read_curve_csv(short.path()).is_err());
    }

    #[test]
    fn exported_default_curve_reloads_identically() {
        let curve = DegradationCurve::synthetic_default();
        let file = NamedTempFile::new().unwrap();
        write_curve_csv(file.path(), &curve).unwrap();
        let reloaded = read_curve_csv(file.path()).unwrap();
        assert_eq!(curve, reloaded);
    }

    #[test]
    fn schedule_csv_round_trips_exactly() {
        let params = BatteryParams::default();
        let schedule = Schedule::new(62.5, vec![1.25, -3.0, 0.125]).unwrap();
        let trajectory = simulate_soc(&schedule, &params);
        let scenario = PriceScenario::new(vec![0.1, 0.2, 0.05], "test").unwrap();
        let file = NamedTempFile::new().unwrap();
        write_schedule_csv(file.path(), &schedule, &trajectory, &scenario).unwrap();
        let (again, prices_again) = read_schedule_csv(file.path(), schedule.soc_0).unwrap();
        assert_eq!(again.powers, schedule.powers);
        assert_eq!(prices_again.prices, scenario.prices);
    }

    #[test]
    fn frontier_csv_has_flags() {
        let points = vec![
            FrontierPoint {
                w_c: 0.0,
                cost: 0.0,
                degradation: 0.0,
                powers: vec![0.0],
                feasible: true,
                error: None,
            },
            FrontierPoint {
                w_c: 1.0,
                cost: 1.0,
                degradation: 1.0,
                powers: vec![0.0],
                feasible: true,
                error: None,
            },
        ];
        let file = NamedTempFile::new().unwrap();
        write_frontier_csv(file.path(), &points).unwrap();
        let text = std::fs::read_to_string(file.path()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("w_c,cost_usd,degradation,feasible,dominated"));
        assert_eq!(lines.next(), Some("0,0,0,true,false"));
        assert_eq!(lines.next(), Some("1,1,1,true,true"));
    }
}
