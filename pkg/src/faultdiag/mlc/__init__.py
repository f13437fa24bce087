"""Multi-label fault classifiers and the severity grader."""
from .bayes import (
    ChainModel,
    GnbModel,
    chain_predict,
    chain_predict_batch,
    gnb_posterior,
    gnb_predict,
    train_chain,
    train_gnb,
)
from .io import load_model, model_from_dict, model_to_dict, save_model
from .mlknn import MlknnModel, mlknn_predict, mlknn_predict_batch, train_mlknn
from .severity import (
    Severity,
    SeverityModel,
    iso_severity_lookup,
    severity_predict,
    severity_thresholds,
    train_severity_tree,
)
from .tree import (
    BinaryRelevanceModel,
    DecisionTreeModel,
    Node,
    entropy,
    gini,
    split_gain,
    train_binary_relevance,
    train_tree,
    tree_predict,
    tree_predict_batch,
)

__all__ = [name for name in dir() if not name.startswith("_")]
