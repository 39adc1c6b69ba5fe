"""Activity recognition over atomic intervals: a formal-concept lattice built
from an activity/attribute cross table, interval classification with location
and timeband constraints, and sequential rules for complex events."""

from .fca import (AttributeTag, ConceptLattice, CrossTable, FormalConcept,
                  MixedTables, TableTooLarge, UnknownMember, build_lattice,
                  derive, enumerate_concepts)
from .recognize import (ClassifiedInterval, classify_interval, classify_runs,
                        default_cross_table, derive_interval_attributes,
                        golden_subtable, hr_rise_after, recognize_complex,
                        LOCATION_PERMITTED)

__all__ = [
    "AttributeTag", "CrossTable", "FormalConcept", "ConceptLattice",
    "derive", "enumerate_concepts", "build_lattice",
    "UnknownMember", "TableTooLarge", "MixedTables",
    "ClassifiedInterval", "classify_interval", "classify_runs",
    "recognize_complex", "default_cross_table", "golden_subtable",
    "derive_interval_attributes", "hr_rise_after", "LOCATION_PERMITTED",
]
