from .mphcnn import (
    MPHCNN,
    ModelParams,
    feature_dim,
    param_count,
    conv_param_count,
    mlp_param_count,
    embedding_param_count,
    wide_param_count,
    hierarchical_representations,
    similarity_features,
)
