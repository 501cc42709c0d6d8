//! Synthetic infant cohort generation.
//!
//! A cohort is a sequence of [`LabeledSample`]s, each holding a
//! [`PatientRecord`] (age, sex, weight, virion count) plus two severity
//! targets: the exact formula value and a noise-injected copy.
//!
//! Determinism contract: sample `i` of a cohort is drawn from its own
//! splitmix64 stream seeded with `master_seed XOR (i * 0x9E3779B97F4A7C15)`,
//! and the five draws per sample happen in a fixed order (age, virion count,
//! sex, weight, noise). Equal configs therefore produce equal cohorts, bit
//! for bit, regardless of thread count or generation order.

mod dataset;
mod tables;

pub use dataset::{
    read_dataset, read_features, read_targets, write_dataset, X_FILE, X_HEADER, Y_HEADER,
    Y_NOISY_FILE, Y_PRECISE_FILE,
};
pub use tables::{WeightTables, AGE_MONTHS_MAX, TABLE_LEN};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::SplitMix64;

/// Largest virion count the generator draws (inclusive).
pub const VIRION_COUNT_MAX: u64 = 10_000_000_000;

/// Half-width of the multiplicative noise applied to severities.
pub const NOISE_HALF_WIDTH: f64 = 1e-4;

/// Number of model features per record (weight, age, virion count, sex).
pub const FEATURE_COUNT: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sex {
    Male,
    Female,
}

impl Sex {
    /// On-disk and feature encoding: male = 0, female = 1.
    pub fn code(self) -> u8 {
        match self {
            Sex::Male => 0,
            Sex::Female => 1,
        }
    }

    pub fn from_code(code: u64) -> Result<Self> {
        match code {
            0 => Ok(Sex::Male),
            1 => Ok(Sex::Female),
            other => Err(Error::OutOfRange {
                what: "sex code",
                got: other.to_string(),
                expected: "0 or 1",
            }),
        }
    }
}

/// One synthetic infant. Construction validates every field range, so a
/// `PatientRecord` value is always internally consistent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatientRecord {
    age_months: u8,
    sex: Sex,
    weight_kg: f64,
    virion_count: u64,
}

impl PatientRecord {
    pub fn new(age_months: u8, sex: Sex, weight_kg: f64, virion_count: u64) -> Result<Self> {
        if age_months > AGE_MONTHS_MAX {
            return Err(Error::OutOfRange {
                what: "age_months",
                got: age_months.to_string(),
                expected: "0..=24",
            });
        }
        if !weight_kg.is_finite() || weight_kg < 0.0 {
            return Err(Error::OutOfRange {
                what: "weight_kg",
                got: weight_kg.to_string(),
                expected: "finite and >= 0",
            });
        }
        if virion_count == 0 || virion_count > VIRION_COUNT_MAX {
            return Err(Error::OutOfRange {
                what: "virion_count",
                got: virion_count.to_string(),
                expected: "1..=10^10",
            });
        }
        Ok(Self {
            age_months,
            sex,
            weight_kg,
            virion_count,
        })
    }

    pub fn age_months(&self) -> u8 {
        self.age_months
    }

    pub fn sex(&self) -> Sex {
        self.sex
    }

    pub fn weight_kg(&self) -> f64 {
        self.weight_kg
    }

    pub fn virion_count(&self) -> u64 {
        self.virion_count
    }

    /// Feature vector in CSV column order: weight, age, virion count, sex.
    pub fn features(&self) -> [f64; FEATURE_COUNT] {
        [
            self.weight_kg,
            self.age_months as f64,
            self.virion_count as f64,
            self.sex.code() as f64,
        ]
    }
}

/// A record plus its two severity targets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledSample {
    record: PatientRecord,
    severity_precise: f64,
    severity_noisy: f64,
}

impl LabeledSample {
    /// Builds a sample from already-computed targets, enforcing the noise
    /// envelope: the noisy target stays within a relative 10^-4 of the
    /// precise one (plus a sliver of rounding slack), and is zero exactly
    /// when the precise target is zero.
    pub fn new(record: PatientRecord, severity_precise: f64, severity_noisy: f64) -> Result<Self> {
        for (name, v) in [
            ("severity_precise", severity_precise),
            ("severity_noisy", severity_noisy),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::OutOfRange {
                    what: name,
                    got: v.to_string(),
                    expected: "finite and >= 0",
                });
            }
        }
        if severity_precise == 0.0 {
            if severity_noisy != 0.0 {
                return Err(Error::invalid(format!(
                    "noisy severity {severity_noisy} must be zero when precise severity is zero"
                )));
            }
        } else {
            let ratio = severity_noisy / severity_precise;
            if (ratio - 1.0).abs() > NOISE_HALF_WIDTH + 1e-12 {
                return Err(Error::invalid(format!(
                    "noisy/precise ratio {ratio} outside the +/-1e-4 noise envelope"
                )));
            }
        }
        Ok(Self {
            record,
            severity_precise,
            severity_noisy,
        })
    }

    /// Labels a record: computes the precise severity and applies the noise
    /// draw `u`.
    pub fn label(record: PatientRecord, u: f64) -> Result<Self> {
        let precise = severity(&record);
        let noisy = apply_variance(precise, u)?;
        Self::new(record, precise, noisy)
    }

    pub fn record(&self) -> &PatientRecord {
        &self.record
    }

    pub fn severity_precise(&self) -> f64 {
        self.severity_precise
    }

    pub fn severity_noisy(&self) -> f64 {
        self.severity_noisy
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenerationConfig {
    n_samples: usize,
    master_seed: u64,
}

impl GenerationConfig {
    /// Cohort size used when no explicit `--n` is given.
    pub const DEFAULT_N_SAMPLES: usize = 1_000_000;

    pub fn new(n_samples: usize, master_seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::OutOfRange {
                what: "n_samples",
                got: "0".to_string(),
                expected: ">= 1",
            });
        }
        Ok(Self {
            n_samples,
            master_seed,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
}

/// Reference weight for a sex and age: the midpoint of the embedded high and
/// low weight bands.
pub fn acceptable_weight(sex: Sex, age_months: u8) -> Result<f64> {
    WeightTables::embedded().acceptable_weight(sex, age_months)
}

/// Severity index of a record:
///
/// ```text
/// (1 - age/24) * v  +  |(w* - w) / w*| * v^2
/// ```
///
/// where `v` is the virion count, `w` the weight, and `w*` the acceptable
/// weight for the record's sex and age. Nonnegative by construction; exactly
/// zero only at age 24 with weight equal to `w*`.
pub fn severity(record: &PatientRecord) -> f64 {
    let (high, low) = WeightTables::embedded().bands_unchecked(record.sex, record.age_months);
    let acceptable = (high + low) / 2.0;
    let v = record.virion_count as f64;
    let age_coeff = 1.0 - record.age_months as f64 / 24.0;
    let weight_coeff = ((acceptable - record.weight_kg) / acceptable).abs();
    age_coeff * v + weight_coeff * (v * v)
}

/// Applies the multiplicative noise model: `severity * (1 + u)` with
/// `u` limited to the ±10^-4 envelope.
pub fn apply_variance(severity: f64, u: f64) -> Result<f64> {
    if !u.is_finite() || u.abs() > NOISE_HALF_WIDTH {
        return Err(Error::OutOfRange {
            what: "noise draw u",
            got: u.to_string(),
            expected: "[-1e-4, 1e-4]",
        });
    }
    Ok(severity * (1.0 + u))
}

/// Draws one record plus its noise draw from `stream`.
///
/// Draw order is fixed: age, virion count, sex, weight (bounded by the drawn
/// sex's high+low band sum), then the noise draw. Changing this order changes
/// every downstream golden value.
pub fn sample_record(stream: &mut SplitMix64) -> (PatientRecord, f64) {
    let age_months = stream.randint(0, AGE_MONTHS_MAX as u64) as u8;
    let virion_count = stream.randint(1, VIRION_COUNT_MAX);
    let sex = Sex::from_code(stream.randint(0, 1)).expect("draw is 0 or 1");
    let upper = WeightTables::embedded()
        .draw_upper_bound(sex, age_months)
        .expect("drawn age is in range");
    let weight_kg = stream.uniform(0.0, upper);
    let u = stream.uniform(-NOISE_HALF_WIDTH, NOISE_HALF_WIDTH);
    let record = PatientRecord::new(age_months, sex, weight_kg, virion_count)
        .expect("draws satisfy field ranges");
    (record, u)
}

/// Generates the labeled cohort for `config`. Pure in the config: equal
/// configs yield equal cohorts regardless of thread count.
pub fn generate(config: &GenerationConfig) -> Vec<LabeledSample> {
    (0..config.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut stream = SplitMix64::for_element(config.master_seed, i as u64);
            let (record, u) = sample_record(&mut stream);
            LabeledSample::label(record, u).expect("generated draws satisfy label invariants")
        })
        .collect()
}

/// Design matrix for a set of records, columns in CSV order
/// (weight, age, virion count, sex code).
pub fn feature_matrix(records: &[PatientRecord]) -> Matrix {
    let mut data = Vec::with_capacity(records.len() * FEATURE_COUNT);
    for r in records {
        data.extend_from_slice(&r.features());
    }
    Matrix::from_vec(data, records.len(), FEATURE_COUNT).expect("length matches by construction")
}
