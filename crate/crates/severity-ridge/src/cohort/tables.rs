//! Embedded weight-for-age reference bands (kg) for ages 0 through 24
//! months, one high and one low band per sex. The bands are part of the
//! reproducibility contract: the generator and the severity formula read
//! them, so changing a single entry changes every derived cohort.

use super::Sex;
use crate::error::{Error, Result};

/// Oldest age, in months, the tables cover.
pub const AGE_MONTHS_MAX: u8 = 24;

/// One entry per month of age, 0..=24.
pub const TABLE_LEN: usize = AGE_MONTHS_MAX as usize + 1;

const MALE_HIGH: [f64; TABLE_LEN] = [
    3.9, 5.1, 6.3, 7.2, 7.9, 8.4, 8.9, 9.3, 9.6, 10.0, 10.3, 10.5, 10.8, 11.1, 11.3, 11.6, 11.8,
    12.0, 12.3, 12.5, 12.7, 13.0, 13.2, 13.4, 13.7,
];

const MALE_LOW: [f64; TABLE_LEN] = [
    2.9, 3.9, 4.9, 5.6, 6.2, 6.7, 7.1, 7.4, 7.7, 7.9, 8.2, 8.4, 8.6, 8.8, 9.0, 9.2, 9.4, 9.6, 9.7,
    9.9, 10.1, 10.3, 10.5, 10.6, 10.8,
];

const FEMALE_HIGH: [f64; TABLE_LEN] = [
    3.7, 4.8, 5.9, 6.7, 7.3, 7.8, 8.3, 8.7, 9.0, 9.3, 9.6, 9.9, 10.2, 10.4, 10.7, 10.9, 11.2,
    11.4, 11.6, 11.9, 12.1, 12.4, 12.6, 12.8, 13.1,
];

const FEMALE_LOW: [f64; TABLE_LEN] = [
    2.9, 3.6, 4.5, 5.1, 5.6, 6.1, 6.4, 6.7, 7.0, 7.3, 7.5, 7.7, 7.9, 8.1, 8.3, 8.5, 8.7, 8.8, 9.0,
    9.2, 9.4, 9.6, 9.8, 9.9, 10.1,
];

static EMBEDDED: WeightTables = WeightTables {
    male_high: MALE_HIGH,
    male_low: MALE_LOW,
    female_high: FEMALE_HIGH,
    female_low: FEMALE_LOW,
};

#[derive(Clone, Debug, PartialEq)]
pub struct WeightTables {
    male_high: [f64; TABLE_LEN],
    male_low: [f64; TABLE_LEN],
    female_high: [f64; TABLE_LEN],
    female_low: [f64; TABLE_LEN],
}

impl WeightTables {
    /// The built-in bands used by the whole pipeline.
    pub fn embedded() -> &'static WeightTables {
        &EMBEDDED
    }

    /// Builds custom bands, enforcing the same invariants the embedded
    /// tables satisfy: positive entries, high above low at every age, and
    /// monotone growth within each band.
    pub fn new(
        male_high: [f64; TABLE_LEN],
        male_low: [f64; TABLE_LEN],
        female_high: [f64; TABLE_LEN],
        female_low: [f64; TABLE_LEN],
    ) -> Result<Self> {
        let t = Self {
            male_high,
            male_low,
            female_high,
            female_low,
        };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        for (name, band) in [
            ("male high", &self.male_high),
            ("male low", &self.male_low),
            ("female high", &self.female_high),
            ("female low", &self.female_low),
        ] {
            for (age, &v) in band.iter().enumerate() {
                if !v.is_finite() || v <= 0.0 {
                    return Err(Error::invalid(format!(
                        "{name} band entry at age {age} must be positive, got {v}"
                    )));
                }
            }
            for age in 1..TABLE_LEN {
                if band[age] <= band[age - 1] {
                    return Err(Error::invalid(format!(
                        "{name} band must increase with age, violated at age {age}"
                    )));
                }
            }
        }
        for (name, high, low) in [
            ("male", &self.male_high, &self.male_low),
            ("female", &self.female_high, &self.female_low),
        ] {
            for age in 0..TABLE_LEN {
                if high[age] <= low[age] {
                    return Err(Error::invalid(format!(
                        "{name} high band must exceed low band, violated at age {age}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn bands(&self, sex: Sex) -> (&[f64; TABLE_LEN], &[f64; TABLE_LEN]) {
        match sex {
            Sex::Male => (&self.male_high, &self.male_low),
            Sex::Female => (&self.female_high, &self.female_low),
        }
    }

    fn checked_age(age_months: u8) -> Result<usize> {
        if age_months > AGE_MONTHS_MAX {
            return Err(Error::OutOfRange {
                what: "age_months",
                got: age_months.to_string(),
                expected: "0..=24",
            });
        }
        Ok(age_months as usize)
    }

    /// High-band weight for a sex and age.
    pub fn high(&self, sex: Sex, age_months: u8) -> Result<f64> {
        let i = Self::checked_age(age_months)?;
        Ok(self.bands(sex).0[i])
    }

    /// Low-band weight for a sex and age.
    pub fn low(&self, sex: Sex, age_months: u8) -> Result<f64> {
        let i = Self::checked_age(age_months)?;
        Ok(self.bands(sex).1[i])
    }

    /// Reference ("acceptable") weight: the midpoint of the high and low
    /// bands for that sex and age.
    pub fn acceptable_weight(&self, sex: Sex, age_months: u8) -> Result<f64> {
        let i = Self::checked_age(age_months)?;
        let (high, low) = self.bands(sex);
        Ok((high[i] + low[i]) / 2.0)
    }

    /// Upper bound of the generator's weight draw: high band plus low band.
    pub fn draw_upper_bound(&self, sex: Sex, age_months: u8) -> Result<f64> {
        let i = Self::checked_age(age_months)?;
        let (high, low) = self.bands(sex);
        Ok(high[i] + low[i])
    }

    /// Band values for an age already validated elsewhere (used on hot paths
    /// where the age came out of a `PatientRecord`).
    pub(crate) fn bands_unchecked(&self, sex: Sex, age_months: u8) -> (f64, f64) {
        debug_assert!(age_months <= AGE_MONTHS_MAX);
        let (high, low) = self.bands(sex);
        (high[age_months as usize], low[age_months as usize])
    }
}
