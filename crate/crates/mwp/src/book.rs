//! Compiles every code block in the book (`book/src/*.md`) as a doc-test,
//! so the guide and the library cannot drift apart. Only built under
//! `cfg(doctest)`.

macro_rules! chapter {
    ($name:ident, $path:literal) => {
        #[doc = include_str!($path)]
        mod $name {}
    };
}

chapter!(introduction, "../../../book/src/introduction.md");
chapter!(expressions, "../../../book/src/expressions.md");
chapter!(corpora, "../../../book/src/corpora.md");
chapter!(metrics, "../../../book/src/metrics.md");
chapter!(probes, "../../../book/src/probes.md");
chapter!(models, "../../../book/src/models.md");
chapter!(generation, "../../../book/src/generation.md");
chapter!(cli, "../../../book/src/cli.md");
