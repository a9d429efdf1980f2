#![allow(dead_code)]

pub mod ad_corpus;
pub mod geometry;
pub mod laws;
