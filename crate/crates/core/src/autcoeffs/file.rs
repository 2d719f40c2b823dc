use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use super::provider::{CoeffProvider, PrimeData};
use super::satake::SatakeLocal;
use super::AutError;

/// How body lines are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileMode {
    /// `p a1 a2 a3 a4`: Satake parameters.
    Satake,
    /// `p l1 [l2 ...]`: `lambda(p), lambda(p^2), ...`.
    Lambda,
    /// `p l`: normalized GL(2) eigenvalue, lifted by the symmetric cube.
    Gl2Sym3,
    /// `p l1 l2`: two GL(2) eigenvalues, tensored.
    Gl2Pair,
}

impl FromStr for FileMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "satake" => Ok(FileMode::Satake),
            "lambda" => Ok(FileMode::Lambda),
            "gl2-sym3" => Ok(FileMode::Gl2Sym3),
            "gl2-pair" => Ok(FileMode::Gl2Pair),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `i`. Accepts U+2212 as a minus sign.
pub(crate) fn parse_complex(raw: &str) -> Result<Complex64, String> {
    let s: String = raw.trim().replace('\u{2212}', "-");
    if s.is_empty() {
        return Err("empty number".into());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| format!("bad number '{raw}'"));
    };
    // split at the last sign that is not the leading one or part of an exponent
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let imag = |t: &str| -> Result<f64, String> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            t => t.parse::<f64>().map_err(|_| format!("bad number '{raw}'")),
        }
    };
    match split {
        None => Ok(Complex64::new(0.0, imag(body)?)),
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| format!("bad number '{raw}'"))?;
            Ok(Complex64::new(re, imag(&body[i..])?))
        }
    }
}

struct Header {
    name: String,
    conductor: u64,
    mu: [Complex64; 4],
    c_pi: Complex64,
    mode: FileMode,
}

fn parse_header(line: &str, lineno: usize) -> Result<Header, AutError> {
    let err = |msg: String| AutError::Parse { line: lineno, msg };
    let rest = line.strip_prefix("#LFUNC").ok_or_else(|| err("expected '#LFUNC' header".into()))?;
    let mut name = None;
    let mut conductor = None;
    let mut mu = None;
    let mut c_pi = None;
    let mut mode = None;
    for token in rest.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(|| err(format!("expected key=value, got '{token}'")))?;
        match key {
            "name" => name = Some(value.to_string()),
            "degree" => {
                if value != "4" {
                    return Err(err(format!("degree must be 4, got {value}")));
                }
            }
            "conductor" => conductor = Some(value.parse::<u64>().map_err(|_| err(format!("bad conductor '{value}'")))?),
            "mu" => {
                let parts: Vec<Complex64> = value.split(',').map(parse_complex).collect::<Result<_, _>>().map_err(err)?;
                let arr: [Complex64; 4] =
                    parts.try_into().map_err(|_| err("mu needs exactly four entries".into()))?;
                mu = Some(arr);
            }
            "c_pi" => c_pi = Some(parse_complex(value).map_err(err)?),
            "mode" => mode = Some(value.parse::<FileMode>().map_err(err)?),
            other => return Err(err(format!("unknown header key '{other}'"))),
        }
    }
    Ok(Header {
        name: name.ok_or_else(|| err("missing name".into()))?,
        conductor: conductor.ok_or_else(|| err("missing conductor".into()))?,
        mu: mu.ok_or_else(|| err("missing mu".into()))?,
        c_pi: c_pi.ok_or_else(|| err("missing c_pi".into()))?,
        mode: mode.ok_or_else(|| err("missing mode".into()))?,
    })
}

/// Parses the coefficient format: a `#LFUNC` header followed by `p v1 [v2 ...]`
/// lines; other `#` lines and blank lines are ignored.
pub fn parse_provider(text: &str) -> Result<CoeffProvider, AutError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (hline, htext) = lines
        .by_ref()
        .find(|(_, l)| !l.is_empty() && (l.starts_with("#LFUNC") || !l.starts_with('#')))
        .ok_or(AutError::Parse { line: 1, msg: "missing '#LFUNC' header".into() })?;
    let header = parse_header(htext, hline)?;
    let mut primes: Vec<PrimeData> = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| AutError::Parse { line: lineno, msg };
        let mut fields = line.split_whitespace();
        let p: u64 = fields
            .next()
            .unwrap()
            .parse()
            .map_err(|_| err(format!("bad prime in '{line}'")))?;
        if !crate::arith::is_prime(p) {
            return Err(err(format!("{p} is not prime")));
        }
        let values: Vec<Complex64> = fields.map(parse_complex).collect::<Result<_, _>>().map_err(err)?;
        let real = |i: usize| -> Result<f64, AutError> {
            let v = values[i];
            if v.im != 0.0 {
                return Err(err(format!("GL(2) eigenvalue must be real, got {v}")));
            }
            Ok(v.re)
        };
        let data = match header.mode {
            FileMode::Satake => {
                let alphas: [Complex64; 4] =
                    values.clone().try_into().map_err(|_| err("satake mode needs four parameters".into()))?;
                let local = SatakeLocal::new(p, alphas);
                local.check_closure().map_err(|e| AutError::Validation(format!("line {lineno}: {e}")))?;
                PrimeData { prime: p, satake: Some(local), given: Vec::new() }
            }
            FileMode::Lambda => {
                if values.is_empty() {
                    return Err(err("lambda mode needs at least one value".into()));
                }
                PrimeData { prime: p, satake: None, given: values.clone() }
            }
            FileMode::Gl2Sym3 => {
                if values.len() != 1 {
                    return Err(err("gl2-sym3 mode needs one eigenvalue".into()));
                }
                PrimeData { prime: p, satake: Some(SatakeLocal::sym3(p, real(0)?)), given: Vec::new() }
            }
            FileMode::Gl2Pair => {
                if values.len() != 2 {
                    return Err(err("gl2-pair mode needs two eigenvalues".into()));
                }
                PrimeData { prime: p, satake: Some(SatakeLocal::rankin(p, real(0)?, real(1)?)), given: Vec::new() }
            }
        };
        if !seen.insert(p) {
            return Err(err(format!("duplicate prime {p}")));
        }
        primes.push(data);
    }
    primes.sort_by_key(|d| d.prime);
    CoeffProvider::new(header.name, header.conductor, header.mu, header.c_pi, primes)
}

pub fn file_provider(path: impl AsRef<Path>) -> Result<CoeffProvider, AutError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| AutError::Io { path: path.display().to_string(), source })?;
    parse_provider(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autcoeffs::sym3_delta;

    const HEADER: &str = "#LFUNC name=t degree=4 conductor=1 mu=16.5,17.5,5.5,6.5 c_pi=-1";

    #[test]
    fn complex_literals() {
        let c = |a, b| Complex64::new(a, b);
        assert_eq!(parse_complex("1.5").unwrap(), c(1.5, 0.0));
        assert_eq!(parse_complex("1+2i").unwrap(), c(1.0, 2.0));
        assert_eq!(parse_complex("-1-2.5i").unwrap(), c(-1.0, -2.5));
        assert_eq!(parse_complex("\u{2212}0.5").unwrap(), c(-0.5, 0.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2E+1i").unwrap(), c(1e-3, 20.0));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn header_only() {
        let p = parse_provider(&format!("{HEADER} mode=lambda\n")).unwrap();
        assert_eq!(p.lambda_at(1).unwrap(), Complex64::new(1.0, 0.0));
        assert!(p.prime_data().is_empty());
        assert!(matches!(p.lambda_at(2), Err(AutError::Gap { prime: 2, .. })));
    }

    #[test]
    fn sym3_lift_matches_builtin() {
        let text = format!("{HEADER} mode=gl2-sym3\n# tau(2) = -24\n2 \u{2212}0.530330\n");
        let p = parse_provider(&text).unwrap();
        let builtin = sym3_delta(10);
        assert!((p.lambda_at(2).unwrap() - builtin.lambda_at(2).unwrap()).norm() < 1e-5);
        assert!((p.lambda_at(8).unwrap() - builtin.lambda_at(8).unwrap()).norm() < 1e-4);
    }

    #[test]
    fn duplicate_prime_is_rejected() {
        let text = format!("{HEADER} mode=lambda\n2 0.5\n3 0.1\n2 0.4\n");
        match parse_provider(&text) {
            Err(AutError::Parse { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("duplicate"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        let text = format!("{HEADER} mode=lambda\n\n2 x\n");
        assert!(matches!(parse_provider(&text), Err(AutError::Parse { line: 3, .. })));
        let text = format!("{HEADER} mode=gl2-pair\n4 0.1 0.2\n");
        assert!(matches!(parse_provider(&text), Err(AutError::Parse { line: 2, .. })));
        assert!(matches!(parse_provider("2 0.5\n"), Err(AutError::Parse { line: 1, .. })));
    }

    #[test]
    fn non_unitary_satake_is_rejected() {
        let text = format!("{HEADER} mode=satake\n3 2 1 1 1\n");
        assert!(matches!(parse_provider(&text), Err(AutError::Validation(_))));
        let ok = format!("{HEADER} mode=satake\n3 1 -1 i -i\n");
        let p = parse_provider(&ok).unwrap();
        assert!((p.lambda_at(3).unwrap()).norm() < 1e-12);
    }
}
