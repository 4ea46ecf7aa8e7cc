"""Program generation, safety fuzzing, the declarative subtyping oracle and the regression corpus."""
from .corpus import (
    BridgeResult,
    CorpusError,
    CorpusProgram,
    CorpusReport,
    FileResult,
    bridge_program,
    check_program,
    default_corpus_dir,
    load_corpus,
    load_file,
    parse_corpus_text,
    run_corpus,
    soundness_bridge,
)
from .fuzz import OUTCOMES, FuzzFailure, FuzzReport, fuzz_one, fuzz_safety, replay
from .generate import GenConfig, GenerationFailed, gen_well_typed, program_seed, term_depth
from .oracle import DeclarativeOracle, declarative_subtype_oracle, default_oracle
from .sweep import SPLIT_ONLY_WITNESS, SweepReport, encoding_sweep, oracle_sweep, split_only_witness
from .universe import closed_universe, enumerate_universe, load_manifest

__all__ = [
    "OUTCOMES",
    "SPLIT_ONLY_WITNESS",
    "BridgeResult",
    "CorpusError",
    "CorpusProgram",
    "CorpusReport",
    "DeclarativeOracle",
    "FileResult",
    "FuzzFailure",
    "FuzzReport",
    "GenConfig",
    "GenerationFailed",
    "SweepReport",
    "bridge_program",
    "check_program",
    "closed_universe",
    "declarative_subtype_oracle",
    "default_corpus_dir",
    "default_oracle",
    "encoding_sweep",
    "enumerate_universe",
    "fuzz_one",
    "fuzz_safety",
    "gen_well_typed",
    "load_corpus",
    "load_file",
    "load_manifest",
    "oracle_sweep",
    "parse_corpus_text",
    "program_seed",
    "replay",
    "run_corpus",
    "soundness_bridge",
    "split_only_witness",
    "term_depth",
]
