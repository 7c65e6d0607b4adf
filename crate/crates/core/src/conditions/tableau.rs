use serde_json::{json, Value};
use thiserror::Error;

use crate::exact::{ExactError, ExactScalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("invalid tableau document: {0}")]
    Schema(String),
    #[error("{field}: {detail}")]
    Dimension { field: &'static str, detail: String },
    #[error("bad entry {location}: {source}")]
    Entry { location: String, source: ExactError },
    #[error("row {row} violates c_i = Σ_j a_ij: Σ_j a_ij − c_i = {discrepancy}")]
    RowSum { row: usize, discrepancy: ExactScalar },
    #[error("entries mix discriminants √{0} and √{1}")]
    DiscriminantMismatch(u64, u64),
    #[error("unknown built-in method `{0}` (known: euler, rk4, fake5, fake6)")]
    UnknownBuiltin(String),
}

/// Controls for [`Tableau::from_json`].
#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Accept rows whose sum differs from `c_i`. Such tableaus still have
    /// elementary weights but scalar order analysis refuses them.
    pub allow_inconsistent_rows: bool,
}

/// Butcher tableau `(A, b, c)` with exact entries in `Q(√d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    a: Vec<Vec<ExactScalar>>,
    b: Vec<ExactScalar>,
    c: Vec<ExactScalar>,
    d: u64,
    rows_consistent: bool,
}

impl Tableau {
    /// Validates dimensions, the shared discriminant and the row sums.
    pub fn new(a: Vec<Vec<ExactScalar>>, b: Vec<ExactScalar>, c: Vec<ExactScalar>) -> Result<Self, TableauError> {
        Self::with_options(a, b, c, LoadOptions::default())
    }

    pub fn with_options(
        a: Vec<Vec<ExactScalar>>,
        b: Vec<ExactScalar>,
        c: Vec<ExactScalar>,
        opts: LoadOptions,
    ) -> Result<Self, TableauError> {
        let s = b.len();
        if s == 0 {
            return Err(TableauError::Dimension { field: "b", detail: "a method needs at least one stage".into() });
        }
        if c.len() != s {
            return Err(TableauError::Dimension { field: "c", detail: format!("length {} but s = {s}", c.len()) });
        }
        if a.len() != s {
            return Err(TableauError::Dimension { field: "A", detail: format!("{} rows but s = {s}", a.len()) });
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != s {
                return Err(TableauError::Dimension {
                    field: "A",
                    detail: format!("row {} has {} entries but s = {s}", i + 1, row.len()),
                });
            }
        }
        let mut d = 0;
        for x in a.iter().flatten().chain(&b).chain(&c) {
            match (d, x.discriminant()) {
                (_, 0) => {}
                (0, e) => d = e,
                (cur, e) if cur != e => return Err(TableauError::DiscriminantMismatch(cur, e)),
                _ => {}
            }
        }
        let mut tab = Tableau { a, b, c, d, rows_consistent: true };
        if let Some((row, discrepancy)) = tab.first_row_sum_violation() {
            if !opts.allow_inconsistent_rows {
                return Err(TableauError::RowSum { row, discrepancy });
            }
            tab.rows_consistent = false;
        }
        Ok(tab)
    }

    fn first_row_sum_violation(&self) -> Option<(usize, ExactScalar)> {
        self.a.iter().zip(&self.c).enumerate().find_map(|(i, (row, ci))| {
            let diff = row.iter().cloned().sum::<ExactScalar>() - ci;
            (!diff.is_zero()).then_some((i + 1, diff))
        })
    }

    /// Number of stages `s`.
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// The discriminant shared by all irrational entries, `0` if none.
    pub fn discriminant(&self) -> u64 {
        self.d
    }

    pub fn a(&self) -> &[Vec<ExactScalar>] {
        &self.a
    }

    pub fn b(&self) -> &[ExactScalar] {
        &self.b
    }

    pub fn c(&self) -> &[ExactScalar] {
        &self.c
    }

    pub fn rows_consistent(&self) -> bool {
        self.rows_consistent
    }

    /// `A` strictly lower triangular.
    pub fn is_explicit(&self) -> bool {
        self.a.iter().enumerate().all(|(i, row)| row[i..].iter().all(ExactScalar::is_zero))
    }

    /// Parses the JSON document
    /// `{"s": int, "sqrt_discriminant": int, "c": [ENTRY..], "A": [[ENTRY..]..], "b": [ENTRY..]}`.
    /// Rows of `A` may be shorter than `s`; missing entries are zero.
    pub fn from_json(doc: &Value, opts: LoadOptions) -> Result<Self, TableauError> {
        let obj = doc.as_object().ok_or_else(|| TableauError::Schema("expected a JSON object".into()))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "s" | "sqrt_discriminant" | "c" | "A" | "b" | "name") {
                return Err(TableauError::Schema(format!("unknown field `{key}`")));
            }
        }
        let s = obj
            .get("s")
            .and_then(Value::as_u64)
            .ok_or_else(|| TableauError::Schema("`s` must be a nonnegative integer".into()))? as usize;
        let d = match obj.get("sqrt_discriminant") {
            None => 0,
            Some(v) => v
                .as_u64()
                .ok_or_else(|| TableauError::Schema("`sqrt_discriminant` must be a nonnegative integer".into()))?,
        };
        let b = entry_vector(obj.get("b"), "b", d)?;
        let c = entry_vector(obj.get("c"), "c", d)?;
        let rows = obj
            .get("A")
            .and_then(Value::as_array)
            .ok_or_else(|| TableauError::Schema("`A` must be an array of rows".into()))?;
        let mut a = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| TableauError::Schema(format!("A row {} is not an array", i + 1)))?;
            if row.len() > s {
                return Err(TableauError::Dimension {
                    field: "A",
                    detail: format!("row {} has {} entries but s = {s}", i + 1, row.len()),
                });
            }
            let mut parsed = Vec::with_capacity(s);
            for (j, v) in row.iter().enumerate() {
                parsed.push(parse_entry(v, d, || format!("A[{}][{}]", i + 1, j + 1))?);
            }
            parsed.resize(s, ExactScalar::zero());
            a.push(parsed);
        }
        if b.len() != s {
            return Err(TableauError::Dimension { field: "b", detail: format!("length {} but s = {s}", b.len()) });
        }
        let tab = Self::with_options(a, b, c, opts)?;
        if tab.d != 0 && tab.d != d {
            return Err(TableauError::DiscriminantMismatch(d, tab.d));
        }
        Ok(tab)
    }

    pub fn from_json_str(text: &str, opts: LoadOptions) -> Result<Self, TableauError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| TableauError::Schema(e.to_string()))?;
        Self::from_json(&doc, opts)
    }

    /// The JSON document accepted by [`Tableau::from_json`], full `s × s` rows.
    pub fn to_json(&self) -> Value {
        let entries = |v: &[ExactScalar]| v.iter().map(|x| Value::String(x.to_string())).collect::<Vec<_>>();
        json!({
            "s": self.stages(),
            "sqrt_discriminant": self.d,
            "c": entries(&self.c),
            "A": self.a.iter().map(|row| entries(row)).collect::<Vec<_>>(),
            "b": entries(&self.b),
        })
    }

    /// Floating-point copy `(A, b, c)`, each entry rounded to nearest once.
    pub fn to_f64(&self) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
        let conv = |v: &[ExactScalar]| v.iter().map(ExactScalar::to_f64).collect::<Vec<_>>();
        (self.a.iter().map(|r| conv(r)).collect(), conv(&self.b), conv(&self.c))
    }
}

fn parse_entry(v: &Value, d: u64, location: impl Fn() -> String) -> Result<ExactScalar, TableauError> {
    let parsed = match v {
        Value::String(s) => ExactScalar::parse(s, d),
        Value::Number(n) if n.is_i64() => Ok(ExactScalar::from_integer(n.as_i64().unwrap_or_default())),
        other => {
            return Err(TableauError::Schema(format!(
                "{}: entries must be strings like \"-7/15\" or \"a|b\", got {other}",
                location()
            )))
        }
    };
    parsed.map_err(|source| TableauError::Entry { location: location(), source })
}

fn entry_vector(v: Option<&Value>, field: &'static str, d: u64) -> Result<Vec<ExactScalar>, TableauError> {
    let arr = v
        .and_then(Value::as_array)
        .ok_or_else(|| TableauError::Schema(format!("`{field}` must be an array of entries")))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| parse_entry(x, d, || format!("{field}[{}]", i + 1)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler_doc() -> Value {
        json!({"s": 1, "sqrt_discriminant": 0, "c": ["0"], "A": [["0"]], "b": ["1"]})
    }

    #[test]
    fn loads_explicit_euler() {
        let tab = Tableau::from_json(&euler_doc(), LoadOptions::default()).unwrap();
        assert_eq!(tab.stages(), 1);
        assert!(tab.is_explicit());
        assert_eq!(Tableau::from_json(&tab.to_json(), LoadOptions::default()).unwrap(), tab);
    }

    #[test]
    fn ragged_rows_are_padded() {
        let doc = json!({"s": 2, "c": ["0", "1/2"], "A": [[], ["1/2"]], "b": ["0", 1]});
        let tab = Tableau::from_json(&doc, LoadOptions::default()).unwrap();
        assert_eq!(tab.a()[0].len(), 2);
        assert!(tab.is_explicit());
    }

    #[test]
    fn row_sum_violation_reports_row_and_discrepancy() {
        let doc = json!({"s": 2, "c": ["0", "1/2"], "A": [[], ["1/3"]], "b": ["0", "1"]});
        let err = Tableau::from_json(&doc, LoadOptions::default()).unwrap_err();
        assert_eq!(err, TableauError::RowSum { row: 2, discrepancy: ExactScalar::ratio(-1, 6) });
        let tab = Tableau::from_json(&doc, LoadOptions { allow_inconsistent_rows: true }).unwrap();
        assert!(!tab.rows_consistent());
    }

    #[test]
    fn schema_errors() {
        let bad = [
            json!([1, 2]),
            json!({"s": 1, "c": ["0"], "A": [["0"]]}),
            json!({"s": 1, "c": ["0"], "A": "x", "b": ["1"]}),
            json!({"s": 1, "c": [0.5], "A": [["0"]], "b": ["1"]}),
            json!({"s": 1, "c": ["0"], "A": [["0"]], "b": ["1"], "extra": 1}),
        ];
        for doc in bad {
            assert!(matches!(Tableau::from_json(&doc, LoadOptions::default()), Err(TableauError::Schema(_))), "{doc}");
        }
        let doc = json!({"s": 2, "c": ["0"], "A": [["0"]], "b": ["1"]});
        assert!(matches!(Tableau::from_json(&doc, LoadOptions::default()), Err(TableauError::Dimension { .. })));
    }

    #[test]
    fn entry_errors_carry_location() {
        let doc = json!({"s": 2, "c": ["0", "1"], "A": [[], ["1/0"]], "b": ["1", "0"]});
        let err = Tableau::from_json(&doc, LoadOptions::default()).unwrap_err();
        match err {
            TableauError::Entry { location, source } => {
                assert_eq!(location, "A[2][1]");
                assert!(matches!(source, ExactError::ZeroDenominator(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
        let doc = json!({"s": 1, "c": ["0|1"], "A": [["0|1"]], "b": ["1"]});
        assert!(matches!(
            Tableau::from_json(&doc, LoadOptions::default()),
            Err(TableauError::Entry { source: ExactError::MissingDiscriminant(_), .. })
        ));
    }

    #[test]
    fn mixed_discriminants_rejected() {
        let x = ExactScalar::parse("0|1", 2).unwrap();
        let y = ExactScalar::parse("0|1", 3).unwrap();
        let err = Tableau::new(vec![vec![x.clone(), ExactScalar::zero()], vec![y.clone(), ExactScalar::zero()]], vec![ExactScalar::one(), ExactScalar::zero()], vec![x, y]);
        assert_eq!(err.unwrap_err(), TableauError::DiscriminantMismatch(2, 3));
    }
}
