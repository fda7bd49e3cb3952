use serde::{Deserialize, Serialize};

use super::basic::{arc_triangle, double_bubble, symmetric_triple_bubble, triple_bubble, ArcTriangle};
use super::decorate::four_bubble;
use super::flower::flower;
use super::presets::{necklace, quasi_variant, two_lens, QuasiKind};
use crate::cluster::{Cluster, P2};
use crate::equilibrium::SolveOptions;
use crate::error::{Error, Result};

/// A named preset with its shape parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PresetSpec {
    Double { r1: f64, r2: f64 },
    /// Equal areas from `scale` (the spoke length) unless `areas` is set.
    Triple { scale: f64, areas: Option<[f64; 3]> },
    Four { r1: f64, r2: f64, t_left: f64, t_right: f64 },
    TwoLens { radius: f64, lens: f64 },
    /// `slide = 0` is the symmetric member, which carries an extra floppy
    /// mode; the default slides off it.
    Necklace { k: usize, slide: f64 },
    Flower { r_left: f64, r_right: f64, lens: f64 },
    QuasiTwoLens { s: f64 },
    QuasiFour { s: f64 },
    ArcTriangle { scale: f64, shape: [f64; 2] },
}

impl PresetSpec {
    pub const KINDS: [&'static str; 9] =
        ["double", "triple", "four", "two_lens", "necklace", "flower", "quasi_two_lens", "quasi_four", "arc_triangle"];

    /// Default parameters for a kind name.
    pub fn default_for(kind: &str) -> Result<Self> {
        Ok(match kind {
            "double" => Self::Double { r1: 1.0, r2: 1.0 },
            "triple" => Self::Triple { scale: 1.0, areas: None },
            "four" => Self::Four { r1: 1.0, r2: 1.0, t_left: 0.2, t_right: 0.2 },
            "two_lens" => Self::TwoLens { radius: 1.0, lens: 0.3 },
            "necklace" => Self::Necklace { k: 7, slide: 0.03 },
            "flower" => Self::Flower { r_left: 1.0, r_right: 1.0, lens: 0.05 },
            "quasi_two_lens" => Self::QuasiTwoLens { s: 0.1 },
            "quasi_four" => Self::QuasiFour { s: 0.1 },
            "arc_triangle" => Self::ArcTriangle { scale: 1.0, shape: [0.0, 0.0] },
            other => {
                return Err(Error::Parse(format!("unknown preset `{other}`; expected one of {}", Self::KINDS.join(", "))))
            }
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Double { .. } => "double",
            Self::Triple { .. } => "triple",
            Self::Four { .. } => "four",
            Self::TwoLens { .. } => "two_lens",
            Self::Necklace { .. } => "necklace",
            Self::Flower { .. } => "flower",
            Self::QuasiTwoLens { .. } => "quasi_two_lens",
            Self::QuasiFour { .. } => "quasi_four",
            Self::ArcTriangle { .. } => "arc_triangle",
        }
    }

    pub fn is_quasi(&self) -> bool {
        matches!(self, Self::QuasiTwoLens { .. } | Self::QuasiFour { .. })
    }

    /// Builds the cluster. The arc triangle is not a cluster; use
    /// [`PresetSpec::build_arc_triangle`] for it.
    pub fn build(&self) -> Result<Cluster> {
        match *self {
            Self::Double { r1, r2 } => double_bubble(r1, r2),
            Self::Triple { scale, areas: None } => symmetric_triple_bubble(scale),
            Self::Triple { areas: Some(a), .. } => triple_bubble(a, &SolveOptions::default()),
            Self::Four { r1, r2, t_left, t_right } => four_bubble(r1, r2, t_left, t_right),
            Self::TwoLens { radius, lens } => two_lens(radius, lens),
            Self::Necklace { k, slide } => necklace(k, slide),
            Self::Flower { r_left, r_right, lens } => flower(r_left, r_right, lens),
            Self::QuasiTwoLens { s } => quasi_variant(QuasiKind::TwoLensRecurved, s),
            Self::QuasiFour { s } => quasi_variant(QuasiKind::FourStretched, s),
            Self::ArcTriangle { .. } => {
                Err(Error::Domain("an arc triangle is a three-arc loop, not a cluster".into()))
            }
        }
    }

    pub fn build_arc_triangle(&self) -> Result<ArcTriangle> {
        match *self {
            Self::ArcTriangle { scale, shape } => arc_triangle(scale, P2::new(shape[0], shape[1])),
            _ => Err(Error::Domain(format!("`{}` is not an arc triangle", self.kind()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build() {
        for k in PresetSpec::KINDS {
            let spec = PresetSpec::default_for(k).unwrap();
            assert_eq!(spec.kind(), k);
            if k == "arc_triangle" {
                assert!(spec.build().is_err());
                spec.build_arc_triangle().unwrap();
            } else {
                let c = spec.build().unwrap();
                assert!(c.validate().is_valid(), "{k}");
            }
        }
        assert!(matches!(PresetSpec::default_for("hexagon"), Err(Error::Parse(_))));
    }

    #[test]
    fn serde_roundtrip() {
        let s = PresetSpec::Necklace { k: 8, slide: 0.02 };
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"kind":"necklace","k":8,"slide":0.02}"#);
        assert_eq!(serde_json::from_str::<PresetSpec>(&text).unwrap(), s);
    }
}
