//! Plain-text form `c * x1^e1 x2^e2 + ...`.

use super::{monomial_text, MPSeries};
use crate::coeff::{RingElem, RingTower};
use crate::error::{Error, Result};

impl MPSeries {
    pub fn to_text(&self) -> String {
        let terms = self.terms();
        if terms.is_empty() {
            return "0".into();
        }
        terms
            .iter()
            .map(|(e, c)| {
                if e.iter().all(|&x| x == 0) {
                    c.to_text()
                } else {
                    format!("{} * {}", c.to_text(), monomial_text(e))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Parses the text form; `cap = None` makes an exact polynomial.
    pub fn parse(ring: &RingTower, nvars: usize, cap: Option<usize>, text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "0" || text.is_empty() {
            return Ok(match cap {
                Some(c) => MPSeries::zero(ring, nvars, c),
                None => MPSeries::zero_exact(ring, nvars),
            });
        }
        let mut terms = Vec::new();
        for raw in text.split(" + ") {
            let (coef, mono) = match raw.split_once('*') {
                Some((c, m)) => (c.trim(), m.trim()),
                None if raw.trim_start().starts_with('x') => ("1", raw.trim()),
                None => (raw.trim(), "1"),
            };
            let c = RingElem::parse(ring, coef)?;
            let mut e = vec![0u16; nvars];
            if mono != "1" {
                for factor in mono.split_whitespace() {
                    let (var, pow) = factor.split_once('^').unwrap_or((factor, "1"));
                    let idx: usize = var
                        .strip_prefix('x')
                        .and_then(|v| v.parse().ok())
                        .filter(|&i: &usize| i >= 1 && i <= nvars)
                        .ok_or_else(|| Error::Malformed(format!("bad variable {var}")))?;
                    let pow: u16 = pow.parse().map_err(|_| Error::Malformed(format!("bad exponent {pow}")))?;
                    e[idx - 1] += pow;
                }
            }
            terms.push((e, c));
        }
        MPSeries::from_terms(ring, nvars, cap, &terms)
    }
}
