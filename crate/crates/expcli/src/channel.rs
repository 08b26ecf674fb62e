//! Builtin channel realizations and the plain-text channel file format.
//!
//! A channel file starts with a header line and then lists one gain per line
//! as `i j magnitude phase` with 1-based receiver `i ∈ {1, 2}` and
//! transmitter `j ∈ 1..=J`:
//!
//! ```text
//! J=3 sigma2=1 caps=1,1,1
//! 1 1 2.03 -0.68
//! 1 2 2.1 2.64
//! ...
//! ```
//!
//! Blank lines and anything after `#` are ignored.

use std::path::Path;

use pimac::model::{ChannelInstance, ModelError};
use thiserror::Error;

type Polar = (f64, f64);

const H1: [[Polar; 3]; 2] = [
    [(2.03, -0.68), (2.1, 2.64), (3.2, 1.48)],
    [(4.7, 1.97), (4.5, -0.66), (2.85, 2.41)],
];

const H2: [[Polar; 3]; 2] = [
    [(3.2, -0.72), (2.3, 2.52), (1.9, 1.35)],
    [(2.8, 1.68), (2.5, -0.76), (3.4, 2.23)],
];

/// Extra MAC users appended to `H1` in the multi-user experiments.
const H_PRIME: [[Polar; 4]; 2] = [
    [(0.40, 1.3972), (1.12, 0.7737), (0.43, 1.2874), (0.84, 0.3067)],
    [(1.24, -0.9872), (1.70, 0.9784), (0.83, -0.2156), (0.67, -1.6414)],
];

/// Largest user count of the `H1+Hprime` family.
pub const MAX_USERS: usize = 7;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("cannot read channel file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("unknown channel {0:?}; expected H1, H2, H1+Hprime(J) or a file path")]
    Unknown(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Resolves a builtin name or reads a channel file. Builtins use unit noise
/// and unit power caps.
pub fn load_channel(selector: &str) -> Result<ChannelInstance, ChannelError> {
    if let Some(ch) = builtin(selector)? {
        return Ok(ch);
    }
    let path = Path::new(selector);
    if !path.exists() {
        return Err(ChannelError::Unknown(selector.to_string()));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|source| ChannelError::Io { path: selector.to_string(), source })?;
    parse_channel(&text)
}

/// `Some` when `selector` names a builtin realization.
pub fn builtin(selector: &str) -> Result<Option<ChannelInstance>, ChannelError> {
    let s = selector.trim().to_ascii_uppercase();
    let rows: [Vec<Polar>; 2] = match s.as_str() {
        "H1" => [H1[0].to_vec(), H1[1].to_vec()],
        "H2" => [H2[0].to_vec(), H2[1].to_vec()],
        _ => match s.strip_prefix("H1+HPRIME") {
            Some(rest) => {
                let j = hprime_users(rest).ok_or_else(|| ChannelError::Unknown(selector.to_string()))?;
                [0, 1].map(|i| H1[i].iter().chain(&H_PRIME[i]).take(j).copied().collect())
            }
            None => return Ok(None),
        },
    };
    let j = rows[0].len();
    Ok(Some(ChannelInstance::from_polar(&rows, 1.0, vec![1.0; j])?))
}

fn hprime_users(rest: &str) -> Option<usize> {
    if rest.is_empty() {
        return Some(MAX_USERS);
    }
    let j: usize = rest.strip_prefix('(')?.strip_suffix(')')?.trim().parse().ok()?;
    (3..=MAX_USERS).contains(&j).then_some(j)
}

/// Parses the channel file format described in the module docs.
pub fn parse_channel(text: &str) -> Result<ChannelInstance, ChannelError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("")))
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(ChannelError::Parse {
        line: 1,
        column: 1,
        message: "missing header `J=<n> sigma2=<v> caps=<v,...>`".into(),
    })?;
    let (j, sigma2, caps) = parse_header(hline, header)?;
    let mut rows = [vec![None; j], vec![None; j]];
    for (line, text) in lines {
        let fields = tokens(text);
        if fields.len() != 4 {
            return Err(ChannelError::Parse {
                line,
                column: fields.get(4).map_or(1, |f| f.0),
                message: format!("expected `i j magnitude phase`, found {} fields", fields.len()),
            });
        }
        let i: usize = number(line, fields[0])?;
        let t: usize = number(line, fields[1])?;
        let mag: f64 = number(line, fields[2])?;
        let phase: f64 = number(line, fields[3])?;
        if !(1..=2).contains(&i) {
            return Err(err(line, fields[0].0, "receiver index must be 1 or 2"));
        }
        if !(1..=j).contains(&t) {
            return Err(err(line, fields[1].0, &format!("transmitter index must be in 1..={j}")));
        }
        if !(mag >= 0.0 && mag.is_finite()) {
            return Err(err(line, fields[2].0, "magnitude must be finite and ≥ 0"));
        }
        if !phase.is_finite() {
            return Err(err(line, fields[3].0, "phase must be finite"));
        }
        let slot = &mut rows[i - 1][t - 1];
        if slot.is_some() {
            return Err(err(line, 1, &format!("duplicate entry for h{i}{t}")));
        }
        *slot = Some((mag, phase));
    }
    let mut polar = [Vec::with_capacity(j), Vec::with_capacity(j)];
    for (i, row) in rows.iter().enumerate() {
        for (t, e) in row.iter().enumerate() {
            let e = e.ok_or_else(|| err(hline, 1, &format!("missing entry h{}{}", i + 1, t + 1)))?;
            polar[i].push(e);
        }
    }
    Ok(ChannelInstance::from_polar(&polar, sigma2, caps)?)
}

fn parse_header(line: usize, text: &str) -> Result<(usize, f64, Vec<f64>), ChannelError> {
    let (mut j, mut sigma2, mut caps) = (None, None, None);
    for (col, tok) in tokens(text) {
        let (key, value) = tok.split_once('=').ok_or_else(|| err(line, col, "expected key=value"))?;
        let vcol = col + key.len() + 1;
        match key {
            "J" => j = Some(number::<usize>(line, (vcol, value))?),
            "sigma2" => sigma2 = Some(number::<f64>(line, (vcol, value))?),
            "caps" => {
                let mut out = Vec::new();
                let mut c = vcol;
                for part in value.split(',') {
                    out.push(number::<f64>(line, (c, part))?);
                    c += part.len() + 1;
                }
                caps = Some(out);
            }
            _ => return Err(err(line, col, &format!("unknown header key {key:?}"))),
        }
    }
    let j = j.ok_or_else(|| err(line, 1, "header lacks J"))?;
    if j < 2 {
        return Err(err(line, 1, "J must be at least 2"));
    }
    let sigma2 = sigma2.unwrap_or(1.0);
    let caps = caps.unwrap_or_else(|| vec![1.0; j]);
    if caps.len() != j {
        return Err(err(line, 1, &format!("caps lists {} values for J={j}", caps.len())));
    }
    Ok((j, sigma2, caps))
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(k),
            (true, Some(s)) => {
                out.push((text[..s].chars().count() + 1, &text[s..k]));
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn number<T: std::str::FromStr>(line: usize, (column, text): (usize, &str)) -> Result<T, ChannelError> {
    text.parse().map_err(|_| err(line, column, &format!("cannot parse {text:?} as a number")))
}

fn err(line: usize, column: usize, message: &str) -> ChannelError {
    ChannelError::Parse { line, column, message: message.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_report_columns() {
        assert_eq!(tokens("  1 2\t3.5"), vec![(3, "1"), (5, "2"), (7, "3.5")]);
        assert!(tokens("   ").is_empty());
    }

    #[test]
    fn hprime_user_counts() {
        assert_eq!(hprime_users(""), Some(7));
        assert_eq!(hprime_users("(4)"), Some(4));
        assert_eq!(hprime_users("(2)"), None);
        assert_eq!(hprime_users("(8)"), None);
        assert_eq!(hprime_users("4"), None);
    }

    #[test]
    fn header_errors() {
        assert!(matches!(parse_channel(""), Err(ChannelError::Parse { line: 1, .. })));
        assert!(matches!(parse_channel("J=1"), Err(ChannelError::Parse { .. })));
        assert!(matches!(parse_channel("J=2 caps=1"), Err(ChannelError::Parse { .. })));
        match parse_channel("J=2 foo=1") {
            Err(ChannelError::Parse { column, .. }) => assert_eq!(column, 5),
            other => panic!("{other:?}"),
        }
    }
}
