//! Functions that are continuous on `[a, b]`, smooth away from the left
//! endpoint, and whose best-approximation errors stay above any prescribed
//! decaying sequence, together with machine-checkable lower-bound
//! certificates and an independent minimax solver to cross-check them.

pub mod certifier;
pub mod cli;
pub mod envelope;
pub mod error;
pub mod function;
pub mod interval;
pub mod minimax;
pub mod scheme;
pub mod sequence;

pub use certifier::{certify_range, check, search, AlternationCertificate, LevelCertificate, Verdict};
pub use envelope::{EnvelopeMode, PolygonalEnvelope, SmoothEnvelope};
pub use error::{Error, Result};
pub use interval::Interval;
pub use function::{Candidate, LethargyFunction};
pub use minimax::{cheb_eval, dvp_bracket, remez, MinimaxResult};
pub use scheme::{SchemeKind, SchemeProfile};
pub use sequence::ErrorSequence;
