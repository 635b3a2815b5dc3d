"""Residual BiLSTM-CRF tagger for DNA mutation, protein mutation and SNP mentions."""

from .corpus import ENTITY_TYPES, TAGS, AnnotatedSentence, EntitySpan
from .errors import ConfigError, DataError, DeepVarError, NumericError
from .network import DeepVar, ModelConfig
from .tokenizer import Token, tokenize

__all__ = [
    "ENTITY_TYPES", "TAGS", "AnnotatedSentence", "EntitySpan", "ConfigError", "DataError",
    "DeepVarError", "NumericError", "DeepVar", "ModelConfig", "Token", "tokenize",
]
__version__ = "0.1.0"
