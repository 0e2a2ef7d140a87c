//! LambdaM front end and compiler to KVY combinator code.

pub mod deps;
pub mod kvy;
pub mod lower;
pub mod oracle;
pub mod pipeline;
pub mod prim;
pub mod readback;
pub mod syntax;
pub mod typecheck;
