//! The JSON solution document.
//!
//! ```json
//! {
//!   "format_version": "1",
//!   "colors": ["1", "tau"],
//!   "dims": [["1", "1", "1", 1], ...],
//!   "blocks": [{"labels": ["1", "1", "1", "1", "1", "1"], "coords": [[1.0, 0.0]]}, ...],
//!   "weights": [["1", 1.0, 0.0], ...]
//! }
//! ```
//!
//! `dims` lists only nonzero `N[a][b][c]`, `coords` is the row-major block as
//! `[re, im]` pairs, `weights` is optional and `blocks` may be omitted for a
//! bare rules file. Saved documents list everything in label order with one
//! entry per line, so identical inputs give identical bytes.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::block::{FBlock, FSolution};
use crate::error::{Error, Result};
use crate::normalized::WeightSystem;
use crate::rules::{FusionRules, Label};
use crate::scalar::Scalar;

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub format_version: String,
    pub colors: Vec<String>,
    #[serde(default)]
    pub dims: Vec<(String, String, String, usize)>,
    #[serde(default)]
    pub blocks: Vec<BlockEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<(String, f64, f64)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockEntry {
    pub labels: [String; 6],
    pub coords: Vec<[f64; 2]>,
}

/// A loaded document.
#[derive(Clone, Debug, PartialEq)]
pub struct Loaded {
    pub solution: FSolution,
    pub weights: Option<WeightSystem>,
}

impl SolutionDocument {
    pub fn from_solution(sol: &FSolution, weights: Option<&WeightSystem>) -> Result<Self> {
        let rules = sol.rules();
        let name = |l: Label| rules.name(l).to_string();
        let dims = rules
            .nonzero()
            .map(|(a, b, c, n)| (name(a), name(b), name(c), n))
            .collect();
        let mut blocks = Vec::with_capacity(sol.block_count());
        for block in sol.blocks() {
            let coords = block
                .coords()
                .iter()
                .map(|v| {
                    if v.re.is_finite() && v.im.is_finite() {
                        Ok([v.re, v.im])
                    } else {
                        Err(Error::NonFinite(format!("block {}", describe(rules, block.labels()))))
                    }
                })
                .collect::<Result<_>>()?;
            blocks.push(BlockEntry {
                labels: block.labels().map(name),
                coords,
            });
        }
        if let Some(w) = weights {
            if w.len() != rules.size() {
                return Err(Error::Shape {
                    expected: vec![rules.size()],
                    found: vec![w.len()],
                });
            }
        }
        Ok(Self {
            format_version: FORMAT_VERSION.into(),
            colors: rules.names().to_vec(),
            dims,
            blocks,
            weights: weights.map(|w| rules.labels().map(|l| (name(l), w.get(l).re, w.get(l).im)).collect()),
        })
    }

    /// Canonical text: one dims entry, block or weight per line.
    pub fn to_text(&self) -> String {
        fn json<T: Serialize + ?Sized>(v: &T) -> String {
            serde_json::to_string(v).expect("document values serialize")
        }
        fn list(out: &mut String, key: &str, items: Vec<String>, last: bool) {
            out.push_str(&format!("  {}: [", json(key)));
            if items.is_empty() {
                out.push(']');
            } else {
                out.push('\n');
                let n = items.len();
                for (i, item) in items.into_iter().enumerate() {
                    out.push_str("    ");
                    out.push_str(&item);
                    out.push_str(if i + 1 < n { ",\n" } else { "\n" });
                }
                out.push_str("  ]");
            }
            out.push_str(if last { "\n" } else { ",\n" });
        }
        let mut out = String::from("{\n");
        out.push_str(&format!("  \"format_version\": {},\n", json(&self.format_version)));
        out.push_str(&format!("  \"colors\": {},\n", json(&self.colors)));
        list(&mut out, "dims", self.dims.iter().map(json).collect(), false);
        let blocks = self
            .blocks
            .iter()
            .map(|b| format!("{{\"labels\": {}, \"coords\": {}}}", json(&b.labels), json(&b.coords)))
            .collect();
        list(&mut out, "blocks", blocks, self.weights.is_none());
        if let Some(w) = &self.weights {
            list(&mut out, "weights", w.iter().map(json).collect(), true);
        }
        out.push_str("}\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    /// Rules named by `colors` and `dims`.
    pub fn rules(&self) -> Result<FusionRules> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "format_version {:?}, expected {FORMAT_VERSION:?}",
                self.format_version
            )));
        }
        let mut seen = HashSet::new();
        for c in &self.colors {
            if !seen.insert(c.as_str()) {
                return Err(Error::Validation(format!("colour {c:?} listed twice")));
            }
        }
        let mut rules = FusionRules::empty(self.colors.len()).with_names(self.colors.clone())?;
        let mut listed = HashSet::new();
        for (a, b, c, n) in &self.dims {
            let l = [self.label(a)?, self.label(b)?, self.label(c)?];
            if *n == 0 {
                return Err(Error::Validation(format!("dims entry ({a}, {b}, {c}) has N = 0; list only nonzero entries")));
            }
            if !listed.insert(l) {
                return Err(Error::Validation(format!("dims entry ({a}, {b}, {c}) listed twice")));
            }
            rules.set_dim(l[0], l[1], l[2], *n)?;
        }
        Ok(rules)
    }

    /// Validates the document and builds the solution. Errors name the
    /// offending block and its line in `text` when given.
    pub fn to_solution(&self, text: Option<&str>) -> Result<Loaded> {
        let rules = self.rules()?;
        let lines = text.map(block_lines).unwrap_or_default();
        let mut sol = FSolution::new(rules.clone());
        let mut seen = HashSet::new();
        for (k, entry) in self.blocks.iter().enumerate() {
            let at = || match lines.get(k) {
                Some(line) => format!("block ({}) on line {line}", entry.labels.join(", ")),
                None => format!("block ({})", entry.labels.join(", ")),
            };
            let mut labels = [Label(0); 6];
            for (slot, name) in labels.iter_mut().zip(&entry.labels) {
                *slot = self
                    .label(name)
                    .map_err(|_| Error::Validation(format!("{}: unknown colour {name:?}", at())))?;
            }
            if !seen.insert(labels) {
                return Err(Error::Validation(format!("{}: listed twice", at())));
            }
            if entry.coords.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("{}: non-finite coordinate", at())));
            }
            let flat = entry.coords.iter().map(|&[re, im]| Scalar::new(re, im)).collect();
            let block = FBlock::from_flat(&rules, labels, flat).map_err(|e| match e {
                Error::Block { reason, .. } => Error::Validation(format!("{}: {reason}", at())),
                Error::EmptyModule { .. } => Error::Validation(format!("{}: a module of this block is zero-dimensional", at())),
                other => Error::Validation(format!("{}: {other}", at())),
            })?;
            sol.insert_block(block)?;
        }
        let weights = match &self.weights {
            None => None,
            Some(entries) => {
                let mut values: BTreeMap<Label, Scalar> = BTreeMap::new();
                for (name, re, im) in entries {
                    let l = self.label(name)?;
                    if values.insert(l, Scalar::new(*re, *im)).is_some() {
                        return Err(Error::Validation(format!("weight for {name:?} listed twice")));
                    }
                }
                let w = rules
                    .labels()
                    .map(|l| values.get(&l).copied().ok_or(Error::MissingWeight(l)))
                    .collect::<Result<Vec<_>>>()?;
                Some(WeightSystem::new(w)?)
            }
        };
        Ok(Loaded { solution: sol, weights })
    }

    fn label(&self, name: &str) -> Result<Label> {
        self.colors
            .iter()
            .position(|c| c == name)
            .map(Label)
            .ok_or_else(|| Error::Validation(format!("unknown colour {name:?}")))
    }
}

/// Line numbers of the successive `"labels"` keys.
fn block_lines(text: &str) -> Vec<usize> {
    text.lines()
        .enumerate()
        .flat_map(|(i, line)| std::iter::repeat_n(i + 1, line.matches("\"labels\"").count()))
        .collect()
}

/// `(a, b, c, d, x, y)` in colour names.
pub fn describe(rules: &FusionRules, labels: impl IntoIterator<Item = Label>) -> String {
    labels.into_iter().map(|l| rules.name(l).to_string()).collect::<Vec<_>>().join(", ")
}

pub fn to_string(sol: &FSolution, weights: Option<&WeightSystem>) -> Result<String> {
    Ok(SolutionDocument::from_solution(sol, weights)?.to_text())
}

pub fn from_str(text: &str) -> Result<Loaded> {
    SolutionDocument::parse(text)?.to_solution(Some(text))
}

pub fn save(sol: &FSolution, weights: Option<&WeightSystem>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_string(sol, weights)?)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Loaded> {
    from_str(&std::fs::read_to_string(path)?)
}

/// Weights listed in a document, matched to `rules` by colour name.
pub fn load_weights(path: impl AsRef<Path>, rules: &FusionRules) -> Result<WeightSystem> {
    let doc = SolutionDocument::parse(&std::fs::read_to_string(path)?)?;
    let entries = doc
        .weights
        .ok_or_else(|| Error::Validation("weights file has no \"weights\" entry".into()))?;
    let w = rules
        .labels()
        .map(|l| {
            let name = rules.name(l);
            match entries.iter().filter(|e| e.0 == name).collect::<Vec<_>>().as_slice() {
                [(_, re, im)] => Ok(Scalar::new(*re, *im)),
                [] => Err(Error::MissingWeight(l)),
                _ => Err(Error::Validation(format!("weight for {name:?} listed twice"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    WeightSystem::new(w)
}

/// Rules of a document; its blocks, if any, are ignored.
pub fn load_rules(path: impl AsRef<Path>) -> Result<FusionRules> {
    SolutionDocument::parse(&std::fs::read_to_string(path)?)?.rules()
}
