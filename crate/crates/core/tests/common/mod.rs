#![allow(dead_code)]

pub mod kernel_oracle;
pub mod linalg;
pub mod oracle;
