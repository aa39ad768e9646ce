use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Channel, TimeDomainCriteria};
use crate::error::invalid;
use crate::Error;

/// Built-in operator criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "AEMO_P")]
    AemoP,
    #[serde(rename = "MISO_P")]
    MisoP,
    #[serde(rename = "ERCOT_P")]
    ErcotP,
    #[serde(rename = "ERCOT_Q")]
    ErcotQ,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::AemoP, Preset::MisoP, Preset::ErcotP, Preset::ErcotQ];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::AemoP => "AEMO_P",
            Preset::MisoP => "MISO_P",
            Preset::ErcotP => "ERCOT_P",
            Preset::ErcotQ => "ERCOT_Q",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "AEMO_P" | "AEMO" => Ok(Preset::AemoP),
            "MISO_P" | "MISO" => Ok(Preset::MisoP),
            "ERCOT_P" => Ok(Preset::ErcotP),
            "ERCOT_Q" => Ok(Preset::ErcotQ),
            _ => Err(invalid(format!("unknown preset `{s}`"))),
        }
    }
}

/// 0.2 p.u. of active power per 10° phase jump, in p.u. per radian.
pub fn phase_jump_gain() -> f64 {
    0.2 / 10f64.to_radians()
}

/// One cycle at 60 Hz.
const ONE_CYCLE_60HZ: f64 = 0.01667;

pub fn preset(p: Preset) -> TimeDomainCriteria {
    match p {
        Preset::AemoP | Preset::MisoP => TimeDomainCriteria::new(Channel::PTheta, 0.015, phase_jump_gain(), None),
        Preset::ErcotP => TimeDomainCriteria::new(Channel::PTheta, ONE_CYCLE_60HZ, phase_jump_gain(), Some(0.05)),
        // 0.03 p.u. of reactive power per 3 % voltage step, i.e. unit gain
        Preset::ErcotQ => TimeDomainCriteria::new(Channel::QV, ONE_CYCLE_60HZ, 1.0, Some(0.1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_values() {
        assert_eq!(preset(Preset::ErcotQ).peak_min, 1.0);
        assert_eq!(preset(Preset::AemoP).rise_time_max, 0.015);
        assert_eq!(preset(Preset::ErcotP).decay_time_min, Some(0.05));
        assert_eq!(preset(Preset::AemoP), preset(Preset::MisoP));
        assert!((phase_jump_gain() - 1.1459).abs() < 1e-4);
    }

    #[test]
    fn parses_cli_spellings() {
        assert_eq!("ercot-q".parse::<Preset>().unwrap(), Preset::ErcotQ);
        assert_eq!("AEMO_P".parse::<Preset>().unwrap(), Preset::AemoP);
        assert!("entsoe".parse::<Preset>().is_err());
    }
}
