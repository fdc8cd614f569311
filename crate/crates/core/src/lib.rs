pub mod adaptive;
pub mod asymptotics;
pub mod bayes;
pub mod cli;
pub mod error;
pub mod frequentist;
pub mod model;
pub mod numeric;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use model::{ModelSpec, Observation, PriorSpec, SigmaCoeffs, TruthScenario};
pub use rng::RandomStream;
