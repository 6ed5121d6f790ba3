"""Knowledge-guided unit test generation for Java projects."""

__version__ = "0.1.0"
