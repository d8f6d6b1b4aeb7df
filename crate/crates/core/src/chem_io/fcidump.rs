use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::MolecularIntegrals;
use crate::error::{Error, Result};
use crate::linalg::EriTensor;
use crate::scalar::Real;

/// Entries with magnitude below this are not written.
const EMIT_CUTOFF: f64 = 1e-14;

struct Header {
    norb: usize,
    nelec: usize,
    /// Index of the first line after the namelist terminator.
    body_start: usize,
}

fn parse_header(lines: &[&str]) -> Result<Header> {
    let first = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or(Error::Parse {
            line: 1,
            msg: "empty FCIDUMP".into(),
        })?;
    if !lines[first]
        .trim_start()
        .to_ascii_uppercase()
        .starts_with("&FCI")
    {
        return Err(Error::Parse {
            line: first + 1,
            msg: "expected '&FCI' namelist header".into(),
        });
    }
    let mut text = String::new();
    let mut end = None;
    for (i, raw) in lines.iter().enumerate().skip(first) {
        let upper = raw.to_ascii_uppercase();
        let body = if i == first {
            upper.trim_start().trim_start_matches("&FCI").to_string()
        } else {
            upper
        };
        if let Some(pos) = body
            .find("&END")
            .or_else(|| body.trim_end().strip_suffix('/').map(|s| s.len()))
        {
            text.push_str(&body[..pos]);
            end = Some(i + 1);
            break;
        }
        text.push_str(&body);
        text.push(',');
    }
    let body_start = end.ok_or(Error::Parse {
        line: first + 1,
        msg: "header is not terminated by '&END' or '/'".into(),
    })?;

    // writers pad values, as in `NORB=   2`
    let mut packed = String::with_capacity(text.len());
    for c in text.chars() {
        if c.is_whitespace() && (packed.ends_with('=') || packed.is_empty()) {
            continue;
        }
        if c == '=' {
            let trimmed = packed.trim_end().len();
            packed.truncate(trimmed);
        }
        packed.push(c);
    }
    let mut norb = None;
    let mut nelec = None;
    for token in packed.split([',', ' ', '\t']) {
        let Some((key, value)) = token.split_once('=') else {
            continue;
        };
        let parse_count = |v: &str, key: &str| {
            v.trim().parse::<usize>().map_err(|_| Error::Parse {
                line: first + 1,
                msg: format!("{key} must be a non-negative integer, got '{}'", v.trim()),
            })
        };
        match key.trim() {
            "NORB" => norb = Some(parse_count(value, "NORB")?),
            "NELEC" => nelec = Some(parse_count(value, "NELEC")?),
            _ => {}
        }
    }
    Ok(Header {
        norb: norb.ok_or(Error::Parse {
            line: first + 1,
            msg: "header lacks NORB".into(),
        })?,
        nelec: nelec.ok_or(Error::Parse {
            line: first + 1,
            msg: "header lacks NELEC".into(),
        })?,
        body_start,
    })
}

/// Parses FCIDUMP text. The basis is taken to be orthonormal (`S = I`).
pub fn parse_fcidump<T: Real>(text: &str) -> Result<MolecularIntegrals<T>> {
    let lines: Vec<&str> = text.lines().collect();
    let header = parse_header(&lines)?;
    let n = header.norb;
    let mut h = DMatrix::<T>::zeros(n, n);
    let mut eri = EriTensor::<T>::zeros(n);
    let mut e_nuclear = T::zero();

    for (i, raw) in lines.iter().enumerate().skip(header.body_start) {
        let line = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 'value p q r s', found {} fields", fields.len()),
            });
        }
        let value: f64 = fields[0]
            .replace(['D', 'd'], "e")
            .parse()
            .map_err(|_| Error::Parse {
                line,
                msg: format!("non-numeric value '{}'", fields[0]),
            })?;
        let mut idx = [0usize; 4];
        for (k, f) in fields[1..].iter().enumerate() {
            let v: usize = f.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("non-integer index '{f}'"),
            })?;
            if v > n {
                return Err(Error::Parse {
                    line,
                    msg: format!("index {v} out of range 0..={n}"),
                });
            }
            idx[k] = v;
        }
        let v = T::lit(value);
        match idx {
            [0, 0, 0, 0] => e_nuclear = v,
            [p, 0, 0, 0] if p > 0 => {} // orbital energy, not needed
            [p, q, 0, 0] if p > 0 && q > 0 => {
                h[(p - 1, q - 1)] = v;
                h[(q - 1, p - 1)] = v;
            }
            [p, q, r, s] if p > 0 && q > 0 && r > 0 && s > 0 => {
                eri.set_sym(p - 1, q - 1, r - 1, s - 1, v);
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: format!("invalid index pattern {idx:?}"),
                })
            }
        }
    }

    Ok(MolecularIntegrals::orthonormal(
        header.nelec,
        h,
        eri,
        e_nuclear,
    ))
}

fn pair(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

/// Writes integrals in FCIDUMP form. Only orthonormal-basis integrals can
/// be represented; anything else is rejected.
pub fn emit_fcidump<T: Real>(m: &MolecularIntegrals<T>) -> Result<String> {
    if !m.is_orthonormal(T::lit(1e-10)) {
        return Err(Error::invalid(
            "FCIDUMP stores orthonormal-basis integrals; transform the overlap to identity first",
        ));
    }
    let n = m.n_orbitals;
    let mut out = String::new();
    writeln!(out, " &FCI NORB={n},NELEC={},MS2=0,", m.n_electrons).unwrap();
    let orbsym = vec!["1"; n].join(",");
    writeln!(out, "  ORBSYM={orbsym},").unwrap();
    writeln!(out, "  ISYM=1,").unwrap();
    writeln!(out, " &END").unwrap();

    let cutoff = T::lit(EMIT_CUTOFF);
    let mut record = |v: T, p: usize, q: usize, r: usize, s: usize| {
        writeln!(
            out,
            "{:>24.16e} {p:>4} {q:>4} {r:>4} {s:>4}",
            v.to_f64_lossy()
        )
        .unwrap();
    };
    for i in (0..n).rev() {
        for j in (0..=i).rev() {
            for k in (0..=i).rev() {
                for l in (0..=k).rev() {
                    if pair(k, l) > pair(i, j) {
                        continue;
                    }
                    let v = m.eri.get(i, j, k, l);
                    if v.abs() >= cutoff {
                        record(v, i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in (0..n).rev() {
        for j in (0..=i).rev() {
            let v = m.h_core[(i, j)];
            if v.abs() >= cutoff {
                record(v, i + 1, j + 1, 0, 0);
            }
        }
    }
    record(m.e_nuclear, 0, 0, 0, 0);
    Ok(out)
}

pub fn read_fcidump<T: Real>(path: impl AsRef<Path>) -> Result<MolecularIntegrals<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fcidump(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

pub fn write_fcidump<T: Real>(m: &MolecularIntegrals<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = emit_fcidump(m)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
