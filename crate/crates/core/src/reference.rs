//! The bundled reference case: a minor's consent under GDPR art. 8 and the
//! Italian derogation lowering the age to 14.

use crate::format::parse_bundle;
use crate::model::ExplanandumBundle;

pub const GDPR_ART8_JSON: &str = include_str!("../data/gdpr_art8.json");

pub fn gdpr_art8() -> ExplanandumBundle {
    parse_bundle(GDPR_ART8_JSON).expect("reference bundle is valid")
}
