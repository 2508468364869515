from radonet.app.constants.graph_types import Colour, ExperimentType, VertexClass

__all__ = ["Colour", "ExperimentType", "VertexClass"]
