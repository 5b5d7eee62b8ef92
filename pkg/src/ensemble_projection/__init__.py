"""Ensemble Projection: unsupervised feature learning from sampled prototype sets."""
from .dataset_io import Dataset, load_dataset, save_dataset
from .ensemble import EnsembleModel, fit, load_model, project, project_all, save_model
from .sampling import EPParams

__all__ = [
    "Dataset", "EPParams", "EnsembleModel", "fit", "load_dataset", "load_model",
    "project", "project_all", "save_dataset", "save_model",
]
__version__ = "0.1.0"
