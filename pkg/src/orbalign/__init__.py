"""Unsupervised attributed network alignment with graphlet edge-orbit GCN encoders."""

from .aligner import (AlignmentResult, fine_tune, integrate, lisi, pearson_similarity,
                      predict, trusted_pairs)
from .encoder import Adam, EncoderParams, forward, reconstruction_loss
from .evaluation import MetricReport, mrr, precision_at_q, run_ablation
from .graph import (Dataset, Graph, GroundTruth, load_attributes, load_edge_list,
                    load_groundtruth)
from .orbits import (OrbitMatrixSet, count_orbits_bruteforce, count_orbits_fast,
                     restrict_orbits)
from .pipeline import AlignConfig, align, align_variants
from .spectral import normalized_laplacian, reinforce_laplacian, self_connection
from .synthetic import NoiseSpec, make_noisy_copy, make_random_attributed_pair
from .trainer import TrainConfig, train

__version__ = "0.1.0"
