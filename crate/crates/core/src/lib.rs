//! Formal group laws over Artinian towers, Drinfeld level structures,
//! Lubin quotients and cubical structures.

pub mod coeff;
pub mod error;
pub mod fgl;
pub mod isogeny;
pub mod level;
pub mod series;
pub mod theta;

pub use coeff::{ExtensionKind, RingElem, RingTower};
pub use error::{Error, Result};
pub use fgl::{FormalGroupLaw, LawKind};
pub use isogeny::{Isogeny, Psi};
pub use level::{FinAbGroup, LevelStructure};
pub use series::MPSeries;
pub use theta::ThetaStructure;
