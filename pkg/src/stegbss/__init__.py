"""Steganalysis of image-in-image hiding by blind source separation.

The pipeline decomposes an RGB image into 12 Haar wavelet sub-bands,
treats the flattened sub-bands as mixed signals, isolates a pair of weak
principal components, separates them with FastICA, and classifies the
image as cover or stego from the first four moments of the component
coefficient distributions.  A built-in simulator (invertible coupling
stacks and an additive sub-band mixer) generates reproducible test
corpora so the whole chain can be exercised without any pretrained
hiding network.
"""

__version__ = "0.1.0"
