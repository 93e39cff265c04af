use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{BclError, Result};
use crate::numerics::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: DenseMatrix,
    pub grad: DenseMatrix,
}

/// Named parameters with same-shaped gradient accumulators.
///
/// Iteration is in name order, which fixes the order of optimizer updates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    params: BTreeMap<String, Param>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: DenseMatrix) -> Result<()> {
        let name = name.into();
        if self.params.contains_key(&name) {
            return Err(BclError::InvalidArgument(format!("duplicate parameter {name}")));
        }
        let grad = DenseMatrix::zeros(value.rows(), value.cols());
        self.params.insert(name, Param { value, grad });
        Ok(())
    }

    /// Glorot-uniform `rows × cols` matrix: `U(−b, b)`, `b = √(6 / (rows + cols))`.
    pub fn insert_glorot<R: Rng>(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Result<()> {
        let bound = glorot_bound(rows, cols);
        let values = (0..rows * cols)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        self.insert(name, DenseMatrix::from_raw(rows, cols, values))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    pub fn value(&self, name: &str) -> Result<&DenseMatrix> {
        self.params
            .get(name)
            .map(|p| &p.value)
            .ok_or_else(|| BclError::InvalidArgument(format!("unknown parameter {name}")))
    }

    pub fn value_mut(&mut self, name: &str) -> Result<&mut DenseMatrix> {
        self.params
            .get_mut(name)
            .map(|p| &mut p.value)
            .ok_or_else(|| BclError::InvalidArgument(format!("unknown parameter {name}")))
    }

    pub fn grad(&self, name: &str) -> Result<&DenseMatrix> {
        self.params
            .get(name)
            .map(|p| &p.grad)
            .ok_or_else(|| BclError::InvalidArgument(format!("unknown parameter {name}")))
    }

    /// Adds `g` into the gradient accumulator of `name`.
    pub fn accumulate(&mut self, name: &str, g: &DenseMatrix) -> Result<()> {
        let p = self
            .params
            .get_mut(name)
            .ok_or_else(|| BclError::InvalidArgument(format!("unknown parameter {name}")))?;
        p.grad.add_assign(g)
    }

    pub fn zero_grads(&mut self) {
        for p in self.params.values_mut() {
            p.grad.fill(0.0);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Param)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub(crate) fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Param)> {
        self.params.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> Vec<String> {
        self.params.keys().cloned().collect()
    }

    pub fn num_entries(&self) -> usize {
        self.params.values().map(|p| p.value.len()).sum()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Text dump: per parameter a `name rows cols` header line followed by one
    /// line of space-separated row-major values in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, p) in &self.params {
            let _ = writeln!(out, "{} {} {}", name, p.value.rows(), p.value.cols());
            let vals: Vec<String> = p.value.values().iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", vals.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| BclError::Parse {
            file: "<params>".into(),
            line,
            message,
        };
        let mut store = ParamStore::new();
        let mut lines = text.lines().enumerate();
        while let Some((i, header)) = lines.next() {
            if header.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = header.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(parse_err(i + 1, "expected `name rows cols`".into()));
            }
            let rows: usize = parts[1]
                .parse()
                .map_err(|e| parse_err(i + 1, format!("rows: {e}")))?;
            let cols: usize = parts[2]
                .parse()
                .map_err(|e| parse_err(i + 1, format!("cols: {e}")))?;
            let (j, body) = lines
                .next()
                .ok_or_else(|| parse_err(i + 2, "missing values line".into()))?;
            let values = body
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| parse_err(j + 1, e.to_string()))?;
            let m = DenseMatrix::new(rows, cols, values).map_err(|e| parse_err(j + 1, e.to_string()))?;
            store.insert(parts[0], m)?;
        }
        Ok(store)
    }
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}
