"""Unsupervised salient-object detection by background-template manifold ranking."""
from .background import SaliencyMap, Stage, TemplateWeights, aggregate, fit_weights, template_map
from .config import RunConfig, load_config, save_config
from .harness import run_dataset, run_image, run_pipeline
from .pixelgrid import RasterImage, load_image, slic, smooth, to_lab

__version__ = "0.1.0"
