//! Keeps the guide honest: every chapter of `book/` is included here as a
//! documentation module, so `cargo test --doc -p histpeg-book` compiles
//! and runs each fenced Rust block in the book. A snippet that drifts out
//! of sync with the library fails the build.
//!
//! One module per chapter so a failing doctest names its chapter.

#[doc = include_str!("../../../book/src/ch00-introduction.md")]
pub mod ch00_introduction {}

#[doc = include_str!("../../../book/src/ch01-pegs.md")]
pub mod ch01_pegs {}

#[doc = include_str!("../../../book/src/ch02-hilbert.md")]
pub mod ch02_hilbert {}

#[doc = include_str!("../../../book/src/ch03-histories.md")]
pub mod ch03_histories {}

#[doc = include_str!("../../../book/src/ch04-trace-forms.md")]
pub mod ch04_trace_forms {}

#[doc = include_str!("../../../book/src/ch05-reconstruction.md")]
pub mod ch05_reconstruction {}

#[doc = include_str!("../../../book/src/ch06-entropy.md")]
pub mod ch06_entropy {}

#[doc = include_str!("../../../book/src/ch07-orders.md")]
pub mod ch07_orders {}

#[doc = include_str!("../../../book/src/ch08-consistency.md")]
pub mod ch08_consistency {}

#[doc = include_str!("../../../book/src/ch09-cli.md")]
pub mod ch09_cli {}
