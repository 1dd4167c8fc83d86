"""PCA, 2DPCA and E2DPCA subspace face recognition."""
