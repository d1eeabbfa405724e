"""A compiler from guarded atomic actions (Fe-Si) to RTL and Verilog."""

__version__ = "0.1.0"
