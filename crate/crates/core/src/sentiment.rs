//! Media favorability from human-coded article labels.

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, FavorabilityLabel};
use crate::error::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelTally {
    pub favorable: u64,
    pub unfavorable: u64,
    pub neutral: u64,
}

impl LabelTally {
    pub fn new(favorable: u64, unfavorable: u64, neutral: u64) -> Self {
        LabelTally {
            favorable,
            unfavorable,
            neutral,
        }
    }

    pub fn total(&self) -> u64 {
        self.favorable + self.unfavorable + self.neutral
    }

    pub fn add(&mut self, label: FavorabilityLabel) {
        match label {
            FavorabilityLabel::Favorable => self.favorable += 1,
            FavorabilityLabel::Unfavorable => self.unfavorable += 1,
            FavorabilityLabel::Neutral => self.neutral += 1,
        }
    }
}

/// Counts the labels given to `startup_id` in articles published in `year`.
/// Each (article, startup) label counts once; other startups' labels are ignored.
pub fn tally_labels<'a, I>(documents: I, startup_id: &str, year: i32) -> Result<LabelTally>
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut tally = LabelTally::default();
    for doc in documents.into_iter().filter(|d| d.year() == year) {
        for entry in doc.labels.iter().filter(|l| l.startup_id == startup_id) {
            tally.add(entry.label.parse()?);
        }
    }
    Ok(tally)
}

/// Piecewise favorability index in [-1, 1]:
/// `(f² - u) / total²` when `f > u`, `(f - u²) / total²` when `u > f`, else 0.
pub fn favorability(t: &LabelTally) -> f64 {
    let f = t.favorable as f64;
    let u = t.unfavorable as f64;
    let total = t.total() as f64;
    if t.favorable > t.unfavorable {
        (f * f - u) / (total * total)
    } else if t.unfavorable > t.favorable {
        (f - u * u) / (total * total)
    } else {
        0.0
    }
}
