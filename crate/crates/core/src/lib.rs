//! Circuit obfuscation by appended encryptor gates, with classical
//! correction of the corrupted measurement outcomes.
//!
//! The pipeline is: parse or build a [`QuantumCircuit`], [`obfuscate`] it
//! with a [`GatePool`] and an insertion plan, hand the result to an untrusted
//! [`transpile`] step, simulate, and undo the corruption on the measured
//! counts with a [`Corrector`] built from the [`ObfuscationKey`].
//!
//! [`obfuscate`]: obfuscate::obfuscate
//! [`transpile`]: transpile::transpile

pub mod bench;
pub mod circuit;
pub mod correct;
pub mod io;
pub mod key;
pub mod metrics;
pub mod obfuscate;
pub mod qasm;
pub mod rng;
pub mod sim;
pub mod transpile;

pub use circuit::{Counts, GateInstance, GateKind, MeasurementClass, QuantumCircuit};
pub use correct::Corrector;
pub use obfuscate::{GatePool, InsertionRecord, ObfuscationKey};
pub use sim::ProbabilityVector;

/// Any error the library reports, for callers that do not care which stage failed.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Circuit(#[from] circuit::CircuitError),
    #[error(transparent)]
    Counts(#[from] circuit::CountsError),
    #[error(transparent)]
    Parse(#[from] qasm::ParseErrors),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
    #[error(transparent)]
    Pool(#[from] obfuscate::PoolError),
    #[error(transparent)]
    Plan(#[from] obfuscate::PlanError),
    #[error(transparent)]
    Record(#[from] obfuscate::RecordError),
    #[error(transparent)]
    Key(#[from] key::KeyError),
    #[error(transparent)]
    Correction(#[from] correct::CorrectionError),
    #[error(transparent)]
    Transpile(#[from] transpile::TranspileError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error(transparent)]
    Bench(#[from] bench::BenchError),
    #[error(transparent)]
    Format(#[from] io::FormatError),
}
