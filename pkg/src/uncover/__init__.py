"""Query strategies for set selection and multiset multicover under explorable uncertainty."""

__version__ = "0.1.0"
