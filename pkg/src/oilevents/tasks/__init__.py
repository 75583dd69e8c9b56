from .arp import (ArpHead, ArpModel, Candidate, enumerate_pairs, gold_candidates, new_arp_head,
                  predict_role, train_arp_head)
from .common import FeatureSpace, FeaturizedSentence, SharedBackbone, TrainConfig, collate
from .properties import (PropertyHead, PropertyInstance, PropertyModel, event_instances, fit_property,
                         new_property_model, train_property_head)
from .spans import (ATTENTIVE, SUBTREE, WINDOW, SpanStrategy, attentive_backward,
                    extract_span_attentive, extract_span_subtree, extract_span_window)
from .token import TOKEN_TASKS, TokenClassifierHead, TokenModel, predict_spans, train_token_head

__all__ = [
    "ArpHead", "ArpModel", "Candidate", "enumerate_pairs", "gold_candidates", "new_arp_head",
    "predict_role", "train_arp_head", "FeatureSpace", "FeaturizedSentence", "SharedBackbone",
    "TrainConfig", "collate", "PropertyHead", "PropertyInstance", "PropertyModel", "event_instances",
    "fit_property", "new_property_model", "train_property_head", "ATTENTIVE", "SUBTREE", "WINDOW",
    "SpanStrategy", "attentive_backward", "extract_span_attentive", "extract_span_subtree",
    "extract_span_window", "TOKEN_TASKS", "TokenClassifierHead", "TokenModel", "predict_spans",
    "train_token_head",
]
