"""Benchmark systems and the dropped-equation experiment."""
