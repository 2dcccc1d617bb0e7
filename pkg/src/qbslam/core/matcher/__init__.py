from qbslam.core.matcher.templates import (
    LoopClosure,
    MatcherParams,
    Template,
    TemplateStore,
    cosine_similarity,
    pose_candidates,
)

__all__ = ['LoopClosure', 'MatcherParams', 'Template', 'TemplateStore', 'cosine_similarity', 'pose_candidates']
