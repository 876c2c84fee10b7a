"""Chaotic-quantum temporal classifier for univariate time series, built on numpy.

Subpackages and modules:

- ``ingest``: UCR ``.ts`` / CSV loading and seeded stratified splits
- ``preprocess``: wavelet and window features, SMOTE, standardization
- ``chaos``: logistic and Hénon perturbation of hidden states
- ``qsim`` / ``kernels``: statevector simulator and batched circuit kernels
- ``neural`` / ``models``: hand-differentiated layers and the seven classifiers
- ``bayesopt``: Gaussian-process search over the logistic parameter
- ``experiment`` / ``cli``: training, metrics, sweeps and the benchmark
"""

__version__ = "0.1.0"
