//! Matrix Market coordinate-format ingestion.
//!
//! Values are kept as the decimal strings found in the file and converted to
//! posits by a single rounding of the exact decimal, so the cast pipeline
//! sees exactly what the file says with no intermediate binary hop.

use crate::linalg::DenseMatrix;
use crate::posit::{encode_rational, PositConfig};
use num_bigint::BigUint;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MarketError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unsupported {what}")]
    Unsupported { line: usize, what: String },
    #[error("io: {0}")]
    Io(String),
}

fn parse_err(line: usize, msg: impl Into<String>) -> MarketError {
    MarketError::Parse { line, msg: msg.into() }
}

/// A parsed coordinate file: triplets with 0-based indices and the value
/// text verbatim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixRecord {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub symmetric: bool,
    /// (row, col, decimal string), 0-based, file order.
    pub entries: Vec<(usize, usize, String)>,
}

impl MatrixRecord {
    pub fn read_file(path: &Path) -> Result<MatrixRecord, MarketError> {
        let text = fs::read_to_string(path).map_err(|e| MarketError::Io(e.to_string()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "matrix".into());
        Self::parse(&text, &name)
    }

    pub fn parse(text: &str, name: &str) -> Result<MatrixRecord, MarketError> {
        let mut lines = text.lines().enumerate();
        let (lno, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty file"))?;
        let lno = lno + 1;
        let words: Vec<String> = header.split_whitespace().map(|w| w.to_lowercase()).collect();
        if words.len() != 5 || words[0] != "%%matrixmarket" {
            return Err(parse_err(lno, "expected '%%MatrixMarket object format field symmetry'"));
        }
        if words[1] != "matrix" {
            return Err(MarketError::Unsupported { line: lno, what: format!("object '{}'", words[1]) });
        }
        if words[2] != "coordinate" {
            return Err(MarketError::Unsupported { line: lno, what: format!("format '{}'", words[2]) });
        }
        match words[3].as_str() {
            "real" | "integer" => {}
            other => {
                return Err(MarketError::Unsupported { line: lno, what: format!("field '{other}'") })
            }
        }
        let symmetric = match words[4].as_str() {
            "general" => false,
            "symmetric" => true,
            other => {
                return Err(MarketError::Unsupported { line: lno, what: format!("symmetry '{other}'") })
            }
        };

        // Size line: first non-comment, non-blank line.
        let mut size: Option<(usize, usize, usize, usize)> = None;
        let mut entries = Vec::new();
        for (lno0, raw) in lines {
            let lno = lno0 + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match size {
                None => {
                    if fields.len() != 3 {
                        return Err(parse_err(lno, "size line must be 'rows cols nnz'"));
                    }
                    let rows: usize = fields[0]
                        .parse()
                        .map_err(|_| parse_err(lno, "bad row count"))?;
                    let cols: usize = fields[1]
                        .parse()
                        .map_err(|_| parse_err(lno, "bad column count"))?;
                    let nnz: usize = fields[2]
                        .parse()
                        .map_err(|_| parse_err(lno, "bad entry count"))?;
                    if rows == 0 || cols == 0 {
                        return Err(parse_err(lno, "matrix dimensions must be positive"));
                    }
                    size = Some((rows, cols, nnz, lno));
                    entries.reserve(nnz);
                }
                Some((rows, cols, _, _)) => {
                    if fields.len() != 3 {
                        return Err(parse_err(lno, "entry line must be 'row col value'"));
                    }
                    let i: usize = fields[0]
                        .parse()
                        .map_err(|_| parse_err(lno, "bad row index"))?;
                    let j: usize = fields[1]
                        .parse()
                        .map_err(|_| parse_err(lno, "bad column index"))?;
                    if i == 0 || i > rows || j == 0 || j > cols {
                        return Err(parse_err(lno, format!("index ({i}, {j}) out of bounds")));
                    }
                    if symmetric && j > i {
                        return Err(parse_err(lno, "symmetric file stores the lower triangle only"));
                    }
                    check_decimal(fields[2]).map_err(|msg| parse_err(lno, msg))?;
                    entries.push((i - 1, j - 1, fields[2].to_string()));
                }
            }
        }
        let Some((rows, cols, nnz, size_line)) = size else {
            return Err(parse_err(1, "missing size line"));
        };
        if entries.len() != nnz {
            return Err(parse_err(
                size_line,
                format!("size line declares {nnz} entries, file has {}", entries.len()),
            ));
        }
        if symmetric && rows != cols {
            return Err(parse_err(size_line, "symmetric matrix must be square"));
        }
        Ok(MatrixRecord { name: name.to_string(), rows, cols, symmetric, entries })
    }

    /// Writes the record back in coordinate format, values verbatim, so
    /// parse -> serialize -> parse is a fixpoint.
    pub fn serialize(&self) -> String {
        let symmetry = if self.symmetric { "symmetric" } else { "general" };
        let mut out = format!(
            "%%MatrixMarket matrix coordinate real {symmetry}\n{} {} {}\n",
            self.rows,
            self.cols,
            self.entries.len()
        );
        for (i, j, v) in &self.entries {
            out.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
        }
        out
    }

    /// Expands to dense storage: symmetric mirroring, exact summation of
    /// duplicates, and one rounding per entry into the target format.
    pub fn to_dense(&self, cfg: PositConfig) -> DenseMatrix {
        let mut exact: BTreeMap<(usize, usize), Decimal> = BTreeMap::new();
        for (i, j, text) in &self.entries {
            let d = Decimal::parse(text).expect("validated at parse time");
            add_entry(&mut exact, (*i, *j), d.clone());
            if self.symmetric && i != j {
                add_entry(&mut exact, (*j, *i), d);
            }
        }
        let mut m = DenseMatrix::zeros(self.rows, self.cols, cfg);
        for ((i, j), d) in exact {
            m.set(i, j, d.to_posit(cfg));
        }
        m
    }

    /// Stored entries after symmetric expansion, explicit zeros included.
    pub fn expanded_len(&self) -> usize {
        let off_diag = self
            .entries
            .iter()
            .filter(|(i, j, _)| self.symmetric && i != j)
            .count();
        self.entries.len() + off_diag
    }
}

fn add_entry(map: &mut BTreeMap<(usize, usize), Decimal>, key: (usize, usize), d: Decimal) {
    match map.remove(&key) {
        None => {
            map.insert(key, d);
        }
        Some(prev) => {
            map.insert(key, prev.add(&d));
        }
    }
}

fn check_decimal(s: &str) -> Result<(), String> {
    Decimal::parse(s).map(|_| ())
}

/// Exact signed decimal: digits * 10^exp10.
#[derive(Clone, Debug)]
struct Decimal {
    negative: bool,
    digits: BigUint,
    exp10: i64,
}

impl Decimal {
    fn parse(s: &str) -> Result<Decimal, String> {
        let t = s.trim();
        if t.is_empty() {
            return Err("empty value".into());
        }
        let (mant, exp_part) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], Some(&t[i + 1..])),
            None => (t, None),
        };
        let exp10: i64 = match exp_part {
            Some(e) => e.parse().map_err(|_| format!("bad exponent in '{s}'"))?,
            None => 0,
        };
        let (negative, mant) = match mant.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mant.strip_prefix('+').unwrap_or(mant)),
        };
        let (int_part, frac_part) = match mant.find('.') {
            Some(i) => (&mant[..i], &mant[i + 1..]),
            None => (mant, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(format!("no digits in '{s}'"));
        }
        let joined: String = format!("{int_part}{frac_part}");
        if !joined.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad decimal '{s}'"));
        }
        let digits: BigUint = joined.parse().map_err(|_| format!("bad decimal '{s}'"))?;
        Ok(Decimal { negative, digits, exp10: exp10 - frac_part.len() as i64 })
    }

    fn is_zero(&self) -> bool {
        use num_traits::Zero;
        self.digits.is_zero()
    }

    fn add(&self, other: &Decimal) -> Decimal {
        use num_bigint::BigInt;
        let e = self.exp10.min(other.exp10);
        let scale = |d: &Decimal| -> BigInt {
            let mag = &d.digits * BigUint::from(10u32).pow((d.exp10 - e) as u32);
            let v = BigInt::from(mag);
            if d.negative {
                -v
            } else {
                v
            }
        };
        let sum = scale(self) + scale(other);
        let (negative, mag) = match sum.sign() {
            num_bigint::Sign::Minus => (true, (-sum).to_biguint().unwrap()),
            _ => (false, sum.to_biguint().unwrap()),
        };
        Decimal { negative, digits: mag, exp10: e }
    }

    fn to_posit(&self, cfg: PositConfig) -> crate::posit::PositValue {
        use num_traits::One;
        if self.is_zero() {
            return crate::posit::PositValue::zero(cfg);
        }
        let ten = BigUint::from(10u32);
        let (num, den) = if self.exp10 >= 0 {
            (&self.digits * ten.pow(self.exp10 as u32), BigUint::one())
        } else {
            (self.digits.clone(), ten.pow((-self.exp10) as u32))
        };
        encode_rational(self.negative, &num, &den, cfg)
    }
}
