"""Constructive training, pruning, activation clustering and symbolic rule
extraction for small feedforward classifiers."""

from .dataset import (BUILTIN_SCHEMAS, Dataset, DatasetSchema, DiscretizedView,
                      discretize_inputs, inconsistency_rate, load_builtin,
                      load_dataset, normalize, split)
from .network import (EpochStats, Network, NetworkConfig, accuracy, classify,
                      init_network, train_epoch)
from .trainer import (ArchitectureTrace, ConstructiveSpec, PruneSpec,
                      constructive_train, prune, retrain)
from .clusterer import (ClusterModel, DiscretizedNetwork, EpsilonSchedule,
                        assign, cluster_activations, discretize_network,
                        is_constant_output)
from .rex import (Condition, Rule, RuleMetrics, RuleSet, Table, cluster_rules,
                  default_rule, evaluate_rules, extract_rules, merge_layers,
                  prune_rules, rule_covers)
from .pipeline import ExperimentConfig, render_report, run_reann

__version__ = "0.1.0"
