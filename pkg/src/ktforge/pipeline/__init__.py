"""Staged test generation: framework, multi-view design, transformation, integration, refinement."""
from .run import (ABANDONED, GatewayFactory, PipelineContext, TestClassArtifact, default_builder, focal_slug,
                  run_focal, run_pipeline, write_artifact)
from .stages import (KNOWLEDGE_MARKERS, VIEWS, FrameworkParseError, TestCaseGroup, TestCaseSpec, TestClassFramework,
                     Templates, build_design_prompt, build_framework_prompt, design_test_cases, generate_framework,
                     parse_framework, parse_ir, transform_group)

__all__ = [
    "ABANDONED", "GatewayFactory", "PipelineContext", "TestClassArtifact", "default_builder", "focal_slug", "run_focal",
    "run_pipeline", "write_artifact", "KNOWLEDGE_MARKERS", "VIEWS", "FrameworkParseError", "TestCaseGroup",
    "TestCaseSpec", "TestClassFramework", "Templates", "build_design_prompt", "build_framework_prompt",
    "design_test_cases", "generate_framework", "parse_framework", "parse_ir", "transform_group",
]
