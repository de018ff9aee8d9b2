"""Align a lemma/CNG-tagged gold corpus with candidate-segmentation graphs."""

from .phonology import (
    PhonemeString,
    SandhiRuleTable,
    UnknownSymbol,
    MissingRule,
    UnknownPreverb,
    parse_iast,
    render_iast,
    normalize_anunasika,
    normalize_gemination,
    vowel_sandhi_join,
    apply_preverb,
)
from .corpus import DcsSentence, CorpusIssue, MalformedRecord, parse_dcs_record, validate_corpus
from .morph_tags import CngTable, is_derivational
from .seg_graph import (
    CandidateSegment,
    SegGraph,
    Span,
    Provenance,
    build_graph,
    merge_homonyms,
    add_synthetic_node,
    write_graphml,
    read_graphml,
)
from .aligner import (
    AlignmentResult,
    MatchSet,
    ModificationTables,
    RuleSet,
    Stage,
    DiagnosticCode,
    align_sentence,
    categorize,
    count_bracketings,
    enumerate_compound_partitions,
    match_lemma,
)

__version__ = "0.1.0"
