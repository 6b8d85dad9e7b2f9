//! Heterogeneous graph distillation engine.
//!
//! This crate trains a relational graph convolutional network (RGCN) on a
//! heterogeneous graph and distills it into a structurally identical
//! student model using two knowledge sources:
//!
//! * node-level distillation — temperature-softened teacher logits,
//! * relation-level distillation — matching the student's inter-type
//!   embedding correlation structure (an RBF-kernel "MetaCorr" matrix over
//!   per-type mean embeddings) to the teacher's, weighted by a learnable
//!   type-attention layer.
//!
//! Everything runs on a small tape-based reverse-mode autodiff engine over
//! dense `f64` matrices; no external numeric backends. Graphs are either
//! loaded from a JSON interchange format or produced by a seeded synthetic
//! generator with controllable label noise. See the `book/` guide at the
//! repository root for a narrative walkthrough.

pub mod distill;
pub mod error;
pub mod eval;
pub mod graph;
pub mod jsonio;
pub mod rgcn;
pub mod rng;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};

// Book chapters double as doctests so the guide's snippets stay honest.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(tensors, "../../../book/src/tensors-and-autodiff.md");
    chapter!(graphs, "../../../book/src/heterogeneous-graphs.md");
    chapter!(encoder, "../../../book/src/rgcn-encoder.md");
    chapter!(distillation, "../../../book/src/distillation.md");
    chapter!(training, "../../../book/src/training.md");
    chapter!(evaluation, "../../../book/src/evaluation.md");
}
