"""u-generation homotopy solver toolkit."""
