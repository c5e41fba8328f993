//! Plain-text chain model definitions.
//!
//! ```text
//! # comment
//! n_sites = 8
//! boundary = periodic          # or open (default)
//! site.default = -1*z          # on-site operator X_n
//! site.3 = -1*z + 0.2*x
//! bond.default = -1 x x        # coupling, left operator, right operator
//! bond.2 = -1 x x; 0.5 (x+z) z # several couplings separated by `;`
//! ```
//!
//! Operators are real combinations of `i`, `x`, `y`, `z`, written
//! `a*p + b*q - ...`; a bare number is a multiple of the identity. Inside a bond
//! an operator is a single letter or a parenthesized combination. Bond `b`
//! couples sites `b` and `b + 1` (wrapping to site 0 for periodic chains).

use super::{BondTerm, Boundary, ChainModel};
use crate::quantum::{c, CMatrix, Pauli};
use crate::{Error, Result};
use std::collections::BTreeMap;

struct Cursor<'a> {
    s: &'a [u8],
    i: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Self { s: s.as_bytes(), i: 0 }
    }

    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn done(&mut self) -> bool {
        self.peek().is_none()
    }

    fn number(&mut self) -> std::result::Result<Option<f64>, String> {
        self.skip_ws();
        let start = self.i;
        let s = self.s;
        let digits = |i: &mut usize| {
            let from = *i;
            while *i < s.len() && s[*i].is_ascii_digit() {
                *i += 1;
            }
            *i > from
        };
        let mut i = self.i;
        let mut any = digits(&mut i);
        if i < s.len() && s[i] == b'.' {
            i += 1;
            any |= digits(&mut i);
        }
        if !any {
            return Ok(None);
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if digits(&mut j) {
                i = j;
            }
        }
        self.i = i;
        let text = std::str::from_utf8(&s[start..i]).expect("ascii");
        text.parse::<f64>().map(Some).map_err(|e| format!("bad number `{text}`: {e}"))
    }

    fn letter(&mut self) -> Option<Pauli> {
        let p = self.peek().and_then(|b| Pauli::from_char(b as char))?;
        self.i += 1;
        Some(p)
    }

    /// `[number ['*']] letter | number`
    fn term(&mut self) -> std::result::Result<CMatrix, String> {
        let coef = self.number()?;
        if coef.is_some() {
            self.eat(b'*');
        }
        match (coef, self.letter()) {
            (Some(a), Some(p)) => Ok(p.matrix() * c(a)),
            (None, Some(p)) => Ok(p.matrix()),
            (Some(a), None) => Ok(CMatrix::identity(2, 2) * c(a)),
            (None, None) => Err(self.unexpected("a number or one of i, x, y, z")),
        }
    }

    fn expr(&mut self) -> std::result::Result<CMatrix, String> {
        let mut sign = if self.eat(b'-') { -1.0 } else { self.eat(b'+'); 1.0 };
        let mut total = CMatrix::zeros(2, 2);
        loop {
            total += self.term()? * c(sign);
            if self.eat(b'+') {
                sign = 1.0;
            } else if self.eat(b'-') {
                sign = -1.0;
            } else {
                return Ok(total);
            }
        }
    }

    fn operand(&mut self) -> std::result::Result<CMatrix, String> {
        if self.eat(b'(') {
            let m = self.expr()?;
            if !self.eat(b')') {
                return Err(self.unexpected("`)`"));
            }
            Ok(m)
        } else {
            self.letter().map(Pauli::matrix).ok_or_else(|| self.unexpected("an operator letter or `(`"))
        }
    }

    fn signed_number(&mut self) -> std::result::Result<f64, String> {
        let sign = if self.eat(b'-') { -1.0 } else { self.eat(b'+'); 1.0 };
        self.number()?.map(|x| sign * x).ok_or_else(|| self.unexpected("a coupling constant"))
    }

    fn unexpected(&mut self, wanted: &str) -> String {
        match self.peek() {
            Some(b) => format!("expected {wanted} at column {}, found `{}`", self.i + 1, b as char),
            None => format!("expected {wanted} at end of input"),
        }
    }
}

/// Parses a combination such as `-1*z + 0.5*x`.
pub fn parse_pauli_expr(s: &str) -> Result<CMatrix> {
    let mut cur = Cursor::new(s);
    let m = cur.expr().map_err(Error::InvalidParameter)?;
    if !cur.done() {
        return Err(Error::InvalidParameter(cur.unexpected("end of expression")));
    }
    Ok(m)
}

fn parse_bonds(s: &str) -> std::result::Result<Vec<BondTerm>, String> {
    let mut out = Vec::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let mut cur = Cursor::new(part);
        let g = cur.signed_number()?;
        let l = cur.operand()?;
        let r = cur.operand()?;
        if !cur.done() {
            return Err(cur.unexpected("`;` or end of line"));
        }
        out.push(BondTerm::new(g, l, r).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// Reads a chain model from the key-value format documented in this module.
pub fn parse_model(text: &str) -> Result<ChainModel> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim().to_string();
        if entries.insert(key.clone(), (line_no, value.trim().to_string())).is_some() {
            return Err(Error::Parse { line: line_no, message: format!("duplicate key `{key}`") });
        }
    }
    let err = |line: usize, message: String| Error::Parse { line, message };

    let (n_line, n_text) = entries
        .remove("n_sites")
        .ok_or_else(|| err(0, "missing `n_sites`".into()))?;
    let n_sites: usize = n_text.parse().map_err(|e| err(n_line, format!("n_sites: {e}")))?;
    let boundary = match entries.remove("boundary") {
        Some((line, v)) => v.parse::<Boundary>().map_err(|e| err(line, e.to_string()))?,
        None => Boundary::Open,
    };
    let n_bonds = match boundary {
        Boundary::Open => n_sites.saturating_sub(1),
        Boundary::Periodic => n_sites,
    };

    let site_default = match entries.remove("site.default") {
        Some((line, v)) => parse_pauli_expr(&v).map_err(|e| err(line, e.to_string()))?,
        None => CMatrix::zeros(2, 2),
    };
    let bond_default = match entries.remove("bond.default") {
        Some((line, v)) => parse_bonds(&v).map_err(|m| err(line, m))?,
        None => Vec::new(),
    };
    let mut onsite = vec![site_default; n_sites];
    let mut bonds = vec![bond_default; n_bonds];

    for (key, (line, value)) in entries {
        let (kind, index) = key
            .split_once('.')
            .ok_or_else(|| err(line, format!("unknown key `{key}`")))?;
        let index: usize = index.parse().map_err(|_| err(line, format!("unknown key `{key}`")))?;
        match kind {
            "site" => {
                let slot = onsite
                    .get_mut(index)
                    .ok_or_else(|| err(line, format!("site {index} out of range (n_sites = {n_sites})")))?;
                *slot = parse_pauli_expr(&value).map_err(|e| err(line, e.to_string()))?;
            }
            "bond" => {
                let slot = bonds
                    .get_mut(index)
                    .ok_or_else(|| err(line, format!("bond {index} out of range ({n_bonds} bonds)")))?;
                *slot = parse_bonds(&value).map_err(|m| err(line, m))?;
            }
            _ => return Err(err(line, format!("unknown key `{key}`"))),
        }
    }
    ChainModel::new(n_sites, boundary, onsite, bonds).map_err(|e| err(n_line, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{pauli_i, pauli_x, pauli_z};

    #[test]
    fn expressions() {
        let m = parse_pauli_expr("-1*z + 0.5x - 2").unwrap();
        let want = pauli_z() * c(-1.0) + pauli_x() * c(0.5) - pauli_i() * c(2.0);
        assert!((m - want).norm() < 1e-15);
        assert!((parse_pauli_expr("1e-1*z").unwrap() - pauli_z() * c(0.1)).norm() < 1e-15);
        assert!(parse_pauli_expr("z +").is_err());
        assert!(parse_pauli_expr("q").is_err());
    }

    #[test]
    fn ising_file() {
        let text = "n_sites = 6\nboundary = periodic\nsite.default = -z\nbond.default = -1 x x # ising\n";
        let m = parse_model(text).unwrap();
        assert_eq!(m.n_sites(), 6);
        assert_eq!(m.bonds().len(), 6);
        assert_eq!(m.bonds()[5][0].coupling, -1.0);
    }

    #[test]
    fn overrides_and_errors() {
        let text = "n_sites = 3\nsite.default = z\nsite.1 = x\nbond.1 = 2 (x+z) y; -1 z z\n";
        let m = parse_model(text).unwrap();
        assert!((m.onsite(1) - pauli_x()).norm() < 1e-15);
        assert_eq!(m.bonds()[1].len(), 2);
        assert!(m.bonds()[0].is_empty());

        let bad = |t: &str| match parse_model(t) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(bad("n_sites = 3\nsite.5 = z\n"), 2);
        assert_eq!(bad("n_sites = 3\nfoo = 1\n"), 2);
        assert_eq!(bad("n_sites = 3\nbond.0 = x x\n"), 2);
        assert_eq!(bad("n_sites = 3\nn_sites = 4\n"), 2);
        assert_eq!(bad("boundary = open\n"), 0);
        assert_eq!(bad("n_sites = 3\nsite.0 = i*y\n"), 2);
    }
}
