//! Text and JSON rendering of command results.

use orbifold_core::qseries::QSeries;
use serde::Serialize;

#[derive(Serialize)]
pub struct SeriesTermOut {
    pub exponent: String,
    pub coefficient: String,
}

#[derive(Serialize)]
pub struct SeriesOut {
    pub truncation: String,
    pub terms: Vec<SeriesTermOut>,
}

pub fn series_out(s: &QSeries) -> SeriesOut {
    SeriesOut {
        truncation: s.truncation().to_string(),
        terms: s
            .terms()
            .map(|(e, c)| SeriesTermOut {
                exponent: e.to_string(),
                coefficient: c
                    .as_rat()
                    .map(|r| r.to_string())
                    .unwrap_or_else(|| c.to_text()),
            })
            .collect(),
    }
}

pub fn series_text(s: &QSeries) -> String {
    let mut parts = Vec::new();
    for (e, c) in s.terms() {
        let coeff = c.as_rat().map(|r| r.to_string()).unwrap_or_else(|| format!("({})", c.to_text()));
        if e.denom() == &num::BigInt::from(1) {
            parts.push(format!("{coeff}*q^{}", e.numer()));
        } else {
            parts.push(format!("{coeff}*q^({e})"));
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}
