"""treegaze: syntactic-structure effects in naturalistic reading.

Three analysis families over dependency-parsed sentences:

* gaze transitions between syntactic heads vs. a serial-text baseline,
* a discrete Bayesian network linking sentence features to scanpath
  deviation (edit distance from the text order),
* time-resolved regression of word surprisal onto fixation-locked EEG,
  with cluster-permutation and bootstrap statistics.

Seeded synthetic generators (``treegaze.synth``) provide ground-truth
oracles for every stage.
"""

from . import align, bayesnet, config, corpus, features, frp, gaze, stats, synth, transitions

__all__ = [
    "align",
    "bayesnet",
    "config",
    "corpus",
    "features",
    "frp",
    "gaze",
    "stats",
    "synth",
    "transitions",
]

__version__ = "0.1.0"
