from .helpers import central_jacobian, chunk_list, parse_float_list, round_floats, significant

__all__ = ["central_jacobian", "chunk_list", "parse_float_list", "round_floats", "significant"]
