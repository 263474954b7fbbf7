//! Explanandum bundles, a defeasible reasoner, and an interactive explanation
//! engine that grows an explanation one user action at a time.

pub mod counterfactual;
pub mod es;
pub mod exploration;
pub mod format;
pub mod literal;
pub mod model;
pub mod narrative;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod reasoner;
pub mod reference;
pub mod script;
pub mod validate;

pub use counterfactual::{whatif, CounterfactualError, CounterfactualResult, Diff, Mutation};
pub use es::{
    available_actions, initial_explanans, step, CandidateAction, EsError, Explanans, ExplanatorySpace,
    HeuristicOrder, InfoNode, Interaction, Stage,
};
pub use exploration::Exploration;
pub use format::{parse_bundle, to_document, BundleError};
pub use literal::{Literal, Value};
pub use model::{ExplanandumBundle, Mode};
pub use narrative::{export_narrative, ExportFormat, Narrative};
pub use reasoner::{derive, Derivation, ReasonerError};
pub use validate::{validate_explainability, Violation, ViolationKind};
