//! Built-in datasets and the published prior settings that go with them.

use crate::full_bayes::GammaPriorPair;
use crate::model::TrialData;

/// Interim efficacy analysis of the BNT162b2 phase 3 trial (C4591001).
///
/// Arm sizes follow the BUGS data file (`nv = 17411`, `nc = 17511`); some
/// prose descriptions of the same table swap the two labels.
pub const PFIZER_INTERIM: &str = "pfizer-c4591001-interim";

pub fn builtin(name: &str) -> Option<TrialData> {
    match name {
        PFIZER_INTERIM => Some(pfizer_interim()),
        _ => None,
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &[PFIZER_INTERIM]
}

pub fn pfizer_interim() -> TrialData {
    TrialData {
        n_v: 17411,
        n_c: 17511,
        s_v: 2214.0,
        s_c: 2222.0,
        x_v: 8,
        x_c: 162,
        d: 0.29,
    }
}

/// Gamma priors that reproduce the sponsor's Beta(0.700102, 1) analysis
/// (data-dependent rates `b = s`).
pub fn mimic_priors() -> GammaPriorPair {
    GammaPriorPair {
        a_v: 0.7,
        b_v: 2214.0,
        a_c: 1.0,
        b_c: 2222.0,
    }
}

/// Default elicited priors for VÊ = 0.3 and a one-week mean time to
/// infection, `1/λ̂_c = 0.01917808` years.
pub fn default_priors() -> GammaPriorPair {
    GammaPriorPair {
        a_v: 1.0,
        b_v: 0.01917808,
        a_c: 2.428571,
        b_c: 0.01917808,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_is_valid() {
        let d = builtin(PFIZER_INTERIM).unwrap();
        let checked = TrialData::new(d.n_v, d.n_c, d.s_v, d.s_c, d.x_v, d.x_c, d.d).unwrap();
        assert_eq!(d, checked);
        assert_eq!(d.total_cases(), 170);
        assert!(builtin("nope").is_none());
        assert!(GammaPriorPair::new(1.0, 0.01917808, 2.428571, 0.01917808).unwrap() == default_priors());
    }
}
