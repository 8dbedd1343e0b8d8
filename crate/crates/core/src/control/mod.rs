//! Broadcast feedback: controller, filter, error, and the closed-loop runner.

mod closed_loop;
mod controller;
mod environment;
mod filter;
mod record;

pub use closed_loop::{run_closed_loop, Agent, ControlLaw, LoopRun, LoopSettings};
pub use controller::{controller_step, Broadcaster, ControllerState, Gains};
pub use environment::{apply_environment_perturbation, perturb_real};
pub use filter::{filter_step, FilterSpec};
pub use record::{read_loop_csv, write_loop_csv, LoopRecord, LOOP_SCHEMA};
