"""Fair tabular classification via group-statistics mixing normalization.

The core idea: during training, a normalization layer standardizes each
sample by its own protected group's batch statistics and rescales all
samples by one convex mix of the groups' statistics, so the groups
leave the layer with aligned feature distributions. The layer has no
learnable parameters and turns off at inference, so trained models
never consume the protected attribute when predicting.
"""

from .analysis import (
    Embedding,
    ProbePair,
    SigmoidKernelPCA,
    auxiliary_probe,
    extract_embeddings,
    kernel_pca_sigmoid,
)
from .classifier import FairMLPClassifier
from .data import (
    ColumnEncoder,
    Dataset,
    RawTable,
    SplitSpec,
    dump_encoded_csv,
    encode,
    filter_groups,
    parse_adult,
    split,
)
from .errors import (
    CheckpointError,
    ConfigError,
    DataError,
    DomainError,
    FairnormError,
    ParseError,
    SchemaError,
    ShapeError,
    StateError,
    UndefinedMetricError,
)
from .groupmix import (
    GroupStats,
    MixedMoments,
    MixNormConfig,
    compute_group_stats,
    groupmix_backward,
    groupmix_forward,
    mix_statistics,
    sample_mix_weights,
)
from .layers import Affine, GroupMixNorm, LayerSpec, LayerStack, SiLU
from .metrics import (
    FairnessReport,
    PredictionSet,
    average_precision,
    demographic_parity,
    equal_opportunity,
    equalized_odds,
    full_report,
)
from .numeric import bce_with_logits, matmul, sigmoid, silu_backward, silu_forward
from .optim import ParamSet, adam_step
from .training import (
    ModelConfig,
    TrainConfig,
    TrainedModel,
    build_model,
    finetune,
    run_protocol,
    train,
)

__version__ = "0.1.0"
