//! Curated program pairs shared by tests, the acceptance suite and the CLI examples.

/// An old and a new version of a program.
#[derive(Clone, Copy, Debug)]
pub struct CorpusPair {
    pub name: &'static str,
    /// The kind of edit separating the two versions.
    pub shape: &'static str,
    pub old: &'static str,
    pub new: &'static str,
}

macro_rules! pair {
    ($dir:literal, $name:literal, $shape:literal) => {
        CorpusPair {
            name: $name,
            shape: $shape,
            old: include_str!(concat!("../corpus/", $dir, "/", $name, ".old.w")),
            new: include_str!(concat!("../corpus/", $dir, "/", $name, ".new.w")),
        }
    };
}

/// Pairs with the same output sequence on every input.
pub const EQUIV_PAIRS: &[CorpusPair] = &[
    pair!("equiv", "reorder_init", "reordering"),
    pair!("equiv", "trailing_skip", "trailing skip"),
    pair!("equiv", "duplicate", "duplicate statement"),
    pair!("equiv", "if_motion", "if-motion"),
    pair!("equiv", "loop_body", "loop-body congruence"),
    pair!("equiv", "loop_dup", "loop-body congruence"),
    pair!("equiv", "array_reorder", "reordering"),
    pair!("equiv", "enum_branch", "trailing skip"),
    pair!("equiv", "prompt_loop", "reordering"),
    pair!("equiv", "div_guarded", "if-motion"),
    pair!("equiv", "nested_loops", "loop-body congruence"),
];

pub const CONFIG: CorpusPair = pair!("updates", "config", "new configuration variable");
pub const ENUM: CorpusPair = pair!("updates", "enum", "enumeration extension");
pub const EXIT: CorpusPair = pair!("updates", "exit", "exit on error");
pub const INIT: CorpusPair = pair!("updates", "init", "missing initialization");
pub const WEAKEN: CorpusPair = pair!("updates", "weaken", "type weakening");
pub const PROMPT: CorpusPair = pair!("updates", "prompt", "prompt change");

/// One-token edits of the new versions that leave their update class.
pub const ENUM_MUTANT: &str = include_str!("../corpus/updates/enum.mutant.w");
pub const EXIT_MUTANT: &str = include_str!("../corpus/updates/exit.mutant.w");
pub const INIT_MUTANT: &str = include_str!("../corpus/updates/init.mutant.w");

/// Name of the configuration variable of [`CONFIG`]; the pair is compatible when it is 0.
pub const CONFIG_VAR: &str = "b";

pub fn all_pairs() -> impl Iterator<Item = &'static CorpusPair> {
    EQUIV_PAIRS.iter().chain([&CONFIG, &ENUM, &EXIT, &INIT, &WEAKEN, &PROMPT])
}
