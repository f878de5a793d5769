//! Mapping raw values onto a finite alphabet.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Symbol, SymbolicSeries};

/// Anything that can encode a single raw value as a symbol.
pub trait Symbolizer<T> {
    fn alphabet(&self) -> &[String];
    fn symbol_of(&self, value: T) -> Symbol;
}

/// Threshold table: value `v` maps to the number of cut points `<= v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolMapping<T = f64> {
    alphabet: Vec<String>,
    thresholds: Vec<T>,
}

impl<T: Float> SymbolMapping<T> {
    pub fn new(alphabet: Vec<String>, thresholds: Vec<T>) -> Result<Self> {
        if alphabet.len() < 2 {
            return Err(Error::config("a symbol mapping needs at least two symbols"));
        }
        if thresholds.len() + 1 != alphabet.len() {
            return Err(Error::config(format!(
                "{} symbols need {} thresholds, got {}",
                alphabet.len(),
                alphabet.len() - 1,
                thresholds.len()
            )));
        }
        if thresholds.iter().any(|t| !t.is_finite()) {
            return Err(Error::config("thresholds must be finite"));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("thresholds must be strictly ascending"));
        }
        Ok(Self { alphabet, thresholds })
    }

    /// `{0, 1}` split at `cut`.
    pub fn binary(cut: T) -> Result<Self> {
        Self::new(vec!["0".into(), "1".into()], vec![cut])
    }

    /// Symbols `0..k` with cut points halfway between consecutive integers.
    pub fn integer_levels(k: usize) -> Result<Self> {
        let half = T::from(0.5).unwrap();
        let thresholds = (1..k).map(|i| T::from(i).unwrap() - half).collect();
        Self::new((0..k).map(|i| i.to_string()).collect(), thresholds)
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }
}

impl<T: Float> Symbolizer<T> for SymbolMapping<T> {
    fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    fn symbol_of(&self, value: T) -> Symbol {
        self.thresholds.partition_point(|&t| t <= value) as Symbol
    }
}

/// Encodes a raw series. Non-finite values are rejected with their 1-based position.
pub fn symbolize<T: Float, S: Symbolizer<T>>(id: &str, raw: &[T], mapping: &S) -> Result<SymbolicSeries> {
    let mut out = Vec::with_capacity(raw.len());
    for (i, &v) in raw.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                series: id.to_owned(),
                position: i + 1,
            });
        }
        out.push(mapping.symbol_of(v));
    }
    SymbolicSeries::new(id, mapping.alphabet().to_vec(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_example() {
        let m = SymbolMapping::binary(0.5).unwrap();
        let s = symbolize("x", &[1.82, 1.25, 0.46, 0.0], &m).unwrap();
        assert_eq!(s.symbols, vec![1, 1, 0, 0]);
    }

    #[test]
    fn empty_and_boundary() {
        let m = SymbolMapping::binary(0.5f32).unwrap();
        assert!(symbolize("x", &[], &m).unwrap().is_empty());
        assert_eq!(symbolize("x", &[0.5], &m).unwrap().symbols, vec![1]);
    }

    #[test]
    fn non_finite_reports_position() {
        let m = SymbolMapping::binary(0.5).unwrap();
        match symbolize("x", &[0.1, f64::NAN], &m) {
            Err(Error::NonFinite { series, position }) => {
                assert_eq!(series, "x");
                assert_eq!(position, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_mappings() {
        assert!(SymbolMapping::new(vec!["a".into()], Vec::<f64>::new()).is_err());
        assert!(SymbolMapping::new(vec!["a".into(), "b".into(), "c".into()], vec![1.0, 1.0]).is_err());
        assert!(SymbolMapping::new(vec!["a".into(), "b".into()], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn integer_levels_recover_symbols() {
        let m = SymbolMapping::<f64>::integer_levels(4).unwrap();
        assert_eq!(m.thresholds(), &[0.5, 1.5, 2.5]);
        let s = symbolize("x", &[-0.3, 0.9, 2.2, 3.4, 7.0], &m).unwrap();
        assert_eq!(s.symbols, vec![0, 1, 2, 3, 3]);
    }

    proptest! {
        #[test]
        fn symbol_respects_cut_points(v in -10.0f64..10.0) {
            let m = SymbolMapping::new(
                vec!["lo".into(), "mid".into(), "hi".into()],
                vec![-1.0, 2.0],
            ).unwrap();
            let k = m.symbol_of(v) as usize;
            let t = m.thresholds();
            prop_assert!(k == 0 || t[k - 1] <= v);
            prop_assert!(k == t.len() || v < t[k]);
        }
    }
}
