//! Task automata learned from labelled examples, membership oracles
//! (language models, scripts, people) and gridworld demonstrations.

pub mod automata;
pub mod diss;
pub mod identify;
pub mod learner;
pub mod oracle;
pub mod planner;
pub mod tomita;
pub mod world;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type the planner, energies and search run on.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + Sum + 'static {
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("representable constant")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + Sum + 'static {}

pub type SoftPolicy = planner::SoftPolicy<f64>;
pub type EnergyReport = planner::EnergyReport<f64>;
pub type DissReport = diss::DissReport<f64>;

