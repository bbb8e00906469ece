//! Lower-record data: validation, extraction from complete samples, and
//! generation under the random and inverse sampling schemes.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::Parent;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Fixed sample size `n`; the number of records is random.
    Random,
    /// Sampling stops at the `m`-th record; `k_m = 1`.
    Inverse,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Random => f.write_str("random"),
            Scheme::Inverse => f.write_str("inverse"),
        }
    }
}

/// One record value together with the number of trials that followed it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub r: f64,
    pub k: u64,
}

/// A validated sequence of lower records `(r_1, k_1), ..., (r_m, k_m)` in
/// observation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RecordFile", into = "RecordFile")]
pub struct RecordSample {
    records: Vec<Record>,
    scheme: Scheme,
    n: u64,
}

/// On-disk layout of a record file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordFile {
    pub scheme: Scheme,
    pub n: u64,
    pub records: Vec<Record>,
}

impl TryFrom<RecordFile> for RecordSample {
    type Error = Error;

    fn try_from(file: RecordFile) -> Result<Self> {
        RecordSample::new(file.records, file.scheme, file.n)
    }
}

impl From<RecordSample> for RecordFile {
    fn from(rs: RecordSample) -> Self {
        RecordFile {
            scheme: rs.scheme,
            n: rs.n,
            records: rs.records,
        }
    }
}

impl RecordSample {
    /// Validates the lower-record invariants: strictly decreasing positive
    /// values, counts of at least one summing to `n`, and `k_m = 1` under
    /// inverse sampling.
    pub fn new(records: Vec<Record>, scheme: Scheme, n: u64) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidRecords("no records".into()));
        }
        for (i, rec) in records.iter().enumerate() {
            if !(rec.r.is_finite() && rec.r > 0.0) {
                return Err(Error::InvalidRecords(format!(
                    "record {} has non-positive or non-finite value {}",
                    i + 1,
                    rec.r
                )));
            }
            if rec.k == 0 {
                return Err(Error::InvalidRecords(format!("record {} has k = 0", i + 1)));
            }
        }
        if let Some(i) = records.windows(2).position(|w| w[1].r >= w[0].r) {
            return Err(Error::InvalidRecords(format!(
                "record values must be strictly decreasing; r_{} = {} is not below r_{} = {}",
                i + 2,
                records[i + 1].r,
                i + 1,
                records[i].r
            )));
        }
        let total: u64 = records.iter().map(|rec| rec.k).sum();
        if total != n {
            return Err(Error::InvalidRecords(format!(
                "counts sum to {total} but n = {n}"
            )));
        }
        if scheme == Scheme::Inverse && records.last().map(|rec| rec.k) != Some(1) {
            return Err(Error::InvalidRecords(
                "inverse sampling requires k_m = 1".into(),
            ));
        }
        Ok(Self {
            records,
            scheme,
            n,
        })
    }

    /// Builds a sample from parallel slices of values and counts.
    pub fn from_parts(r: &[f64], k: &[u64], scheme: Scheme) -> Result<Self> {
        if r.len() != k.len() {
            return Err(Error::InvalidRecords(format!(
                "{} values but {} counts",
                r.len(),
                k.len()
            )));
        }
        let records: Vec<Record> = r.iter().zip(k).map(|(&r, &k)| Record { r, k }).collect();
        let n = k.iter().sum();
        Self::new(records, scheme, n)
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of records.
    pub fn m(&self) -> usize {
        self.records.len()
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.records.iter().map(|rec| rec.r)
    }

    pub fn counts(&self) -> impl ExactSizeIterator<Item = u64> + '_ {
        self.records.iter().map(|rec| rec.k)
    }

    /// Applies `f` to every record value, keeping counts. `f` must be
    /// strictly increasing and map into `(0, inf)`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let records = self
            .records
            .iter()
            .map(|rec| Record { r: f(rec.r), k: rec.k })
            .collect();
        Self::new(records, self.scheme, self.n)
    }

    pub fn ordered_view(&self) -> OrderedRecordView {
        ordered_view(self)
    }
}

/// Record values sorted increasingly with their induced counts
/// `k_(i) = k_{m-i+1}`. The sentinels `r_(0) = 0` and `r_(m+1) = inf` are
/// implicit and exposed through [`OrderedRecordView::bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedRecordView {
    pub r_ord: Vec<f64>,
    pub k_ord: Vec<u64>,
}

impl OrderedRecordView {
    pub fn len(&self) -> usize {
        self.r_ord.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_ord.is_empty()
    }

    /// `r_(i)` for `i` in `0..=m+1`, with the sentinels at both ends.
    pub fn bound(&self, i: usize) -> f64 {
        match i {
            0 => 0.0,
            i if i > self.r_ord.len() => f64::INFINITY,
            i => self.r_ord[i - 1],
        }
    }
}

pub fn ordered_view(rs: &RecordSample) -> OrderedRecordView {
    // Lower records arrive in decreasing order, so sorting is reversal.
    OrderedRecordView {
        r_ord: rs.records.iter().rev().map(|rec| rec.r).collect(),
        k_ord: rs.records.iter().rev().map(|rec| rec.k).collect(),
    }
}

/// Parses a complete sample: one positive number per line, or a
/// single-column CSV. Blank lines and lines starting with `#` are skipped.
/// Errors carry 1-based line numbers.
pub fn parse_sample(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.trim();
        if field.is_empty() || field.starts_with('#') {
            continue;
        }
        let field = field.strip_suffix(',').unwrap_or(field).trim().trim_matches('"');
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => values.push(v),
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    content: line.to_string(),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(values)
}

/// Extracts the lower records of a complete sample taken in observation
/// order. Ties with the current minimum are not records. The final count is
/// `n - sum_{i<m} k_i`, so the counts always sum to `n`.
pub fn extract_records(sample: &[f64]) -> Result<RecordSample> {
    if sample.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some((index, &value)) = sample
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(Error::InvalidObservation { index, value });
    }
    let mut records = vec![Record {
        r: sample[0],
        k: 0,
    }];
    let mut last_index = 0usize;
    for (i, &x) in sample.iter().enumerate().skip(1) {
        let current = records.last_mut().expect("non-empty");
        if x < current.r {
            current.k = (i - last_index) as u64;
            last_index = i;
            records.push(Record { r: x, k: 0 });
        }
    }
    let n = sample.len() as u64;
    records.last_mut().expect("non-empty").k = n - last_index as u64;
    RecordSample::new(records, Scheme::Random, n)
}

/// How a simulated record sample is collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingPlan {
    /// Observe `n` values and keep their records.
    Random { n: u64 },
    /// Observe until the `m`-th record. The expected number of draws grows
    /// like `e^m`, so keep `m` modest.
    Inverse { m: usize },
}

pub fn generate_records<R: Rng + ?Sized>(
    parent: &Parent,
    plan: SamplingPlan,
    rng: &mut R,
) -> Result<RecordSample> {
    parent.validate()?;
    match plan {
        SamplingPlan::Random { n } => {
            if n == 0 {
                return Err(Error::InvalidParameter("sample size must be at least 1".into()));
            }
            let sample: Vec<f64> = (0..n).map(|_| parent.sample(rng)).collect();
            extract_records(&sample)
        }
        SamplingPlan::Inverse { m } => {
            if m == 0 {
                return Err(Error::InvalidParameter("record count must be at least 1".into()));
            }
            let mut records = vec![Record {
                r: parent.sample(rng),
                k: 0,
            }];
            while records.len() < m {
                let x = parent.sample(rng);
                let current = records.last_mut().expect("non-empty");
                current.k += 1;
                if x < current.r {
                    records.push(Record { r: x, k: 0 });
                }
            }
            records.last_mut().expect("non-empty").k = 1;
            let n = records.iter().map(|rec| rec.k).sum();
            RecordSample::new(records, Scheme::Inverse, n)
        }
    }
}
