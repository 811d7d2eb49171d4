"""Leaf languages of substitution laminations and boundary-ray classification.

The package computes factor languages of train-track (substitution)
laminations, builds certified injective non-conical rays out of leaf
pieces, and classifies geodesic rays as conical / non-conical /
injective / recurrent at bounded search depth, emitting replayable
certificates for every verdict.
"""

from .words import (Alphabet, Word, UnknownLetter, NotReduced, free_reduce,
                    invert, concat_reduced, factors, is_cyclically_reduced)
from .traintrack import (TrainTrackMap, FixedRayScheme, CancellationDetected,
                         SeedNotExpanding, verify_train_track, fixed_ray,
                         parse_map_text, load_map_file)
from .leaflang import (LeafLanguage, HyperbolicityParams, BeyondHorizon,
                       TooShort, HorizonTooLarge, NotStabilized,
                       build_language, is_leaf_factor, is_coarse_leaf_segment,
                       enumerate_members, max_leaf_overlap)
from .rays import (RayStream, NotCyclicallyReduced, RayExhausted,
                   SearchBudgetExhausted, HorizonTooSmall,
                   NonLeafBlockCertificate, WInfinityBlock, WInfinityScheme,
                   periodic_ray, explicit_ray, extend, build_w_infinity)
from .classify import (Verdict, ConicalCertificate, ConsistencyReport,
                       DepthTooSmall, DepthMismatch,
                       classify_conical, classify_injective,
                       classify_recurrent, consistency_check,
                       CONICAL_CERTIFIED, NON_CONICAL_EVIDENCE,
                       INJECTIVE_EVIDENCE, NON_INJECTIVE_EVIDENCE,
                       RECURRENT_EVIDENCE, NOT_RECURRENT_EVIDENCE, UNKNOWN)
from .cayley import (Presentation, CayleyBall, BudgetExceeded, BeyondBall,
                     build_ball, estimate_delta, is_local_geodesic,
                     parse_presentation)

__version__ = "0.1.0"
