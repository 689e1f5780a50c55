"""Contrastive arbitrary style transfer with adaptive dual temperatures."""
from .backbone import AdaINGenerator, Generator, IdentityGenerator, check_weights, interpolate_styles, stylize
from .contrastive import (MemoryBank, TemperatureConfig, TemperatureState, adaptive_contrastive_loss,
                          contrastive_gradients, dual_temperature_nce, info_nce, msp_contrastive_loss,
                          update_stats)
from .domain import Discriminator, adversarial_loss, cycle_consistency_loss
from .style_codec import (ConfigError, ConvStackExtractor, ExternalExtractor, InputError, MultiLayerStyleProjector,
                          code_similarity, encode_style)
from .trainer import NonFiniteLossError, TrainConfig, Trainer, desk_config, load_config, load_dataset
from .video import patch_content_loss, read_flow, temporal_loss, warp, write_flow

__version__ = "0.1.0"
