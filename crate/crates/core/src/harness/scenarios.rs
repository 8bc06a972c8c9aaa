//! Canonical scenarios shipped with the crate, one or more per acceptance
//! criterion.

use super::config::ScenarioConfig;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BundledScenario {
    pub name: &'static str,
    /// Acceptance criterion the scenario reproduces.
    pub criterion: u8,
    /// The scenario file.
    pub text: &'static str,
}

impl BundledScenario {
    pub fn config(&self) -> Result<ScenarioConfig> {
        ScenarioConfig::from_toml_str(self.text)
    }
}

const SCENARIOS: &[BundledScenario] = &[
    BundledScenario {
        name: "c1-helmholtz-single-ball",
        criterion: 1,
        text: include_str!("../../scenarios/c1-helmholtz-single-ball.toml"),
    },
    BundledScenario {
        name: "c2-helmholtz-double-ball",
        criterion: 2,
        text: include_str!("../../scenarios/c2-helmholtz-double-ball.toml"),
    },
    BundledScenario {
        name: "c3-hidden-neumann-flux",
        criterion: 3,
        text: include_str!("../../scenarios/c3-hidden-neumann-flux.toml"),
    },
    BundledScenario {
        name: "c3-interior-obstruction",
        criterion: 3,
        text: include_str!("../../scenarios/c3-interior-obstruction.toml"),
    },
    BundledScenario { name: "c4-degeneracy", criterion: 4, text: include_str!("../../scenarios/c4-degeneracy.toml") },
    BundledScenario {
        name: "c5-maxwell-single-ball",
        criterion: 5,
        text: include_str!("../../scenarios/c5-maxwell-single-ball.toml"),
    },
    BundledScenario {
        name: "c6-maxwell-double-ball",
        criterion: 6,
        text: include_str!("../../scenarios/c6-maxwell-double-ball.toml"),
    },
    BundledScenario {
        name: "c7-cylinder-shs",
        criterion: 7,
        text: include_str!("../../scenarios/c7-cylinder-shs.toml"),
    },
    BundledScenario {
        name: "c8-boundary-layer-ball",
        criterion: 8,
        text: include_str!("../../scenarios/c8-boundary-layer-ball.toml"),
    },
    BundledScenario {
        name: "c8-boundary-layer-cylinder",
        criterion: 8,
        text: include_str!("../../scenarios/c8-boundary-layer-cylinder.toml"),
    },
    BundledScenario {
        name: "c9-convergence-lmax",
        criterion: 9,
        text: include_str!("../../scenarios/c9-convergence-lmax.toml"),
    },
    BundledScenario {
        name: "c9-convergence-seed",
        criterion: 9,
        text: include_str!("../../scenarios/c9-convergence-seed.toml"),
    },
    BundledScenario {
        name: "c9-convergence-tolerance",
        criterion: 9,
        text: include_str!("../../scenarios/c9-convergence-tolerance.toml"),
    },
];

pub fn bundled_scenarios() -> &'static [BundledScenario] {
    SCENARIOS
}

pub fn bundled_scenario(name: &str) -> Option<&'static BundledScenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}
