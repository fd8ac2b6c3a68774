"""Kac-Moody root systems, affine and bordered apartments, valuated root data and parahoric
families of small split groups over Q with the p-adic valuation."""

from .affine_apartment import (
    ApartmentModel,
    ConvexIntersection,
    EnclosureSpec,
    enclosure,
    enclosure_chain,
    make_model,
    parse_shape,
    preorder_leq,
)
from .bordered_apartment import BorderedApartment, Facade, FacadePoint
from .group_instances import INSTANCES, ClassicalInstance, SLMatrix
from .kac_core import KacMoodyMatrix, Root, imaginary_roots, real_roots, validate_and_classify, weyl_elements
from .parahoric_hovel import (
    HovelPoint,
    ParahoricFamily,
    build_tree,
    certify_membership,
    check_MAO,
    check_parahoric_axioms,
    good_fixator_check,
    residue_roots,
    same_hovel_point,
)
from .valuated_datum import ValuationReport, check_RD_axioms, check_valuation
from .vectorial import VectorialFacet, facet_star, locate_in_tits_cone, make_facet

__version__ = "0.1.0"

__all__ = [
    "ApartmentModel",
    "BorderedApartment",
    "build_tree",
    "certify_membership",
    "check_MAO",
    "check_parahoric_axioms",
    "check_RD_axioms",
    "check_valuation",
    "ClassicalInstance",
    "ConvexIntersection",
    "enclosure",
    "enclosure_chain",
    "EnclosureSpec",
    "Facade",
    "FacadePoint",
    "facet_star",
    "good_fixator_check",
    "HovelPoint",
    "imaginary_roots",
    "INSTANCES",
    "KacMoodyMatrix",
    "locate_in_tits_cone",
    "make_facet",
    "make_model",
    "ParahoricFamily",
    "parse_shape",
    "preorder_leq",
    "real_roots",
    "residue_roots",
    "Root",
    "same_hovel_point",
    "SLMatrix",
    "validate_and_classify",
    "ValuationReport",
    "VectorialFacet",
    "weyl_elements",
]
