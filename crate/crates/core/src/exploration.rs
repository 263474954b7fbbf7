//! One user's walk through the explanatory space of a bundle.

use std::sync::Arc;

use crate::es::{CandidateAction, EsError, Explanans, ExplanatorySpace, HeuristicOrder, InfoNode, Interaction};
use crate::model::{ExplanandumBundle, Mode};
use crate::narrative::{export_narrative, ExportFormat, Narrative};
use crate::reasoner::{derive, Derivation, ReasonerError};

#[derive(Debug, Clone)]
pub struct Exploration {
    bundle: Arc<ExplanandumBundle>,
    derivation: Arc<Derivation>,
    order: HeuristicOrder,
    explanans: Explanans,
    narrative: Narrative,
}

impl Exploration {
    /// Derives the bundle's conclusions and builds E_0. `mode` overrides the
    /// bundle's declared mode.
    pub fn start(
        mut bundle: ExplanandumBundle,
        mode: Option<Mode>,
        order: HeuristicOrder,
    ) -> Result<Self, ReasonerError> {
        if let Some(m) = mode {
            bundle.overview.mode = m;
        }
        let derivation = derive(bundle.theory(), &bundle.grounded_facts())?;
        let explanans = ExplanatorySpace::with_order(&bundle, &derivation, order).initial_explanans();
        let narrative = Narrative::new(&bundle);
        Ok(Exploration {
            bundle: Arc::new(bundle),
            derivation: Arc::new(derivation),
            order,
            explanans,
            narrative,
        })
    }

    fn space(&self) -> ExplanatorySpace<'_> {
        ExplanatorySpace::with_order(&self.bundle, &self.derivation, self.order)
    }

    pub fn bundle(&self) -> &ExplanandumBundle {
        &self.bundle
    }

    pub fn derivation(&self) -> &Derivation {
        &self.derivation
    }

    pub fn explanans(&self) -> &Explanans {
        &self.explanans
    }

    pub fn narrative(&self) -> &Narrative {
        &self.narrative
    }

    pub fn order(&self) -> HeuristicOrder {
        self.order
    }

    /// Applies an interaction and returns the nodes it appended. On error
    /// the exploration is unchanged.
    pub fn apply(&mut self, interaction: &Interaction) -> Result<Vec<InfoNode>, EsError> {
        let next = self.space().step(&self.explanans, interaction)?;
        let before = self.explanans.len();
        let appended = next.nodes[before..].to_vec();
        self.explanans = next;
        if matches!(interaction, Interaction::Mark { .. }) {
            self.narrative = Narrative::from_explanans(&self.bundle, &self.explanans);
        }
        Ok(appended)
    }

    pub fn actions(&self) -> Vec<CandidateAction> {
        self.space().available_actions(&self.explanans)
    }

    pub fn export(&self, format: ExportFormat) -> String {
        export_narrative(&self.narrative, &self.explanans, format)
    }
}
