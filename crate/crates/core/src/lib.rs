pub mod capacity;
pub mod cli;
pub mod scenario;
pub mod sched;
pub mod sim;
pub mod time;
pub mod topology;
pub mod traffic;
