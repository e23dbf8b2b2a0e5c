#![allow(dead_code)]

pub mod audit;
pub mod fd;
pub mod fixtures;
pub mod lp;
pub mod repair;
