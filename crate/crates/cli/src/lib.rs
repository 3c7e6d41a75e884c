//! Command implementations behind the `gaitscope` binary and the local
//! annotation service.

pub mod files;
pub mod plot;
pub mod serve;
