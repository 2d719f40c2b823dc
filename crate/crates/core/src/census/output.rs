use std::io::Write;

use super::{CensusError, CensusReport};

pub const CSV_HEADER: [&str; 17] = [
    "q",
    "chi_index",
    "parity",
    "re",
    "im",
    "abs",
    "eps_re",
    "eps_im",
    "tail_est",
    "status",
    "parity_filter",
    "profile_mode",
    "profile_q",
    "profile_p1",
    "profile_p2",
    "profile_z",
    "profile_f",
];

/// Shortest round-trip text for `x`, in scientific form when `|x|` is tiny
/// or huge.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// One line per row in `(q, chi_index)` order; floats use the shortest
/// representation that round-trips.
pub fn write_csv<W: Write>(report: &CensusReport, out: W) -> Result<(), CensusError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let p = &report.profile;
    let t = p.thresholds();
    let mode = match p.mode {
        crate::moduli::ProfileMode::Desk => "desk",
        crate::moduli::ProfileMode::Paper => "paper",
    };
    let echo = [
        report.parity.as_str().to_string(),
        mode.to_string(),
        format_float(p.q),
        format_float(t.p1),
        format_float(t.p2),
        format_float(t.z),
        p.f.to_string(),
    ];
    for r in &report.rows {
        let mut record = vec![
            r.q.to_string(),
            r.chi_id.to_string(),
            r.parity.to_string(),
            format_float(r.value.re),
            format_float(r.value.im),
            format_float(r.abs()),
            format_float(r.root_number.re),
            format_float(r.root_number.im),
            format_float(r.tail_est),
            r.status.as_str().to_string(),
        ];
        record.extend(echo.iter().cloned());
        w.write_record(&record)?;
    }
    w.flush().map_err(|source| CensusError::Io { path: "<csv>".into(), source })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.0, 1.0, -0.5, 2.2e-16, 1.0 / 3.0, 12.0, 7.9e-12, 3e20, f64::INFINITY] {
            let t = format_float(x);
            assert_eq!(t.parse::<f64>().unwrap(), x, "{t}");
        }
        assert_eq!(format_float(2.5e-16), "2.5e-16");
        assert_eq!(format_float(12.0), "12");
    }
}
