//! Colour labels and fusion dimensions `N[a][b][c] = dim V_ab^c`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a colour inside one [`FusionRules`] instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label(pub usize);

impl Label {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite colour set together with the dimension table of the modules
/// `V_ab^c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FusionRules {
    names: Vec<String>,
    dims: Vec<usize>,
}

impl FusionRules {
    /// Rules with `size` colours and every dimension zero.
    pub fn empty(size: usize) -> Self {
        Self {
            names: (0..size).map(|i| i.to_string()).collect(),
            dims: vec![0; size * size * size],
        }
    }

    /// Builds rules from a dimension function evaluated on every triple.
    pub fn from_fn(size: usize, mut dim: impl FnMut(usize, usize, usize) -> usize) -> Self {
        let mut rules = Self::empty(size);
        for a in 0..size {
            for b in 0..size {
                for c in 0..size {
                    rules.dims[(a * size + b) * size + c] = dim(a, b, c);
                }
            }
        }
        rules
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.size() {
            return Err(Error::Shape {
                expected: vec![self.size()],
                found: vec![names.len()],
            });
        }
        self.names = names;
        Ok(self)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + Clone + '_ {
        (0..self.size()).map(Label)
    }

    pub fn name(&self, l: Label) -> &str {
        &self.names[l.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn label_by_name(&self, name: &str) -> Option<Label> {
        self.names.iter().position(|n| n == name).map(Label)
    }

    pub fn check_label(&self, l: Label) -> Result<Label> {
        if l.0 < self.size() {
            Ok(l)
        } else {
            Err(Error::InvalidLabel {
                index: l.0,
                size: self.size(),
            })
        }
    }

    /// `dim V_ab^c`, validating the labels.
    pub fn hom_dim(&self, a: Label, b: Label, c: Label) -> Result<usize> {
        self.check_label(a)?;
        self.check_label(b)?;
        self.check_label(c)?;
        Ok(self.dim(a, b, c))
    }

    /// `dim V_ab^c` without validation; panics on out-of-range labels.
    #[inline]
    pub fn dim(&self, a: Label, b: Label, c: Label) -> usize {
        let n = self.size();
        self.dims[(a.0 * n + b.0) * n + c.0]
    }

    pub fn set_dim(&mut self, a: Label, b: Label, c: Label, dim: usize) -> Result<()> {
        self.check_label(a)?;
        self.check_label(b)?;
        self.check_label(c)?;
        let n = self.size();
        self.dims[(a.0 * n + b.0) * n + c.0] = dim;
        Ok(())
    }

    pub fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    pub fn is_multiplicity_free(&self) -> bool {
        self.max_dim() <= 1
    }

    /// Nonzero entries `(a, b, c, N)` in lexicographic order.
    pub fn nonzero(&self) -> impl Iterator<Item = (Label, Label, Label, usize)> + '_ {
        let n = self.size();
        self.dims.iter().enumerate().filter(|(_, &d)| d > 0).map(move |(k, &d)| {
            (Label(k / (n * n)), Label((k / n) % n), Label(k % n), d)
        })
    }

    /// The one-colour rules with `N[0][0][0] = 1`.
    pub fn trivial() -> Self {
        Self::from_fn(1, |_, _, _| 1)
    }

    /// Fibonacci rules on `{1, tau}`: `tau (x) tau = 1 (+) tau`.
    pub fn fibonacci() -> Self {
        // N[a][b][c] = 1 unless exactly one of a, b, c is tau.
        Self::from_fn(2, |a, b, c| usize::from(a + b + c != 1))
            .with_names(vec!["1".into(), "tau".into()])
            .expect("two names")
    }
}
