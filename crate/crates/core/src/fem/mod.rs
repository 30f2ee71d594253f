//! P1 finite element test problems: `u_t = d Δu + c·∇u` on the unit square
//! or a star-shaped polygon with homogeneous Dirichlet conditions, giving the
//! semi-discrete system `M u' = K u`.

mod assemble;
mod mesh;

use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

pub use assemble::{
    assemble_full, assemble_p1, element_mass, generate, initial_value, initial_vector, AssembledSystem, ProblemSpec,
};
pub use mesh::{ear_clip, mesh_square, mesh_star, star_outline, TriMesh, STAR_POINTS, STAR_R_INNER, STAR_R_OUTER};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Domain {
    Square,
    Star,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Square => "square",
            Domain::Star => "star",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "square" => Ok(Domain::Square),
            "star" => Ok(Domain::Star),
            _ => Err(Error::InvalidArgument("domain must be square or star")),
        }
    }
}
