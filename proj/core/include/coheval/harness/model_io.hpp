#pragma once

#include <memory>
#include <string>

#include "coheval/harness/checkpoint.hpp"
#include "coheval/models/joint.hpp"
#include "coheval/models/vecconcat.hpp"
#include "coheval/text/vocab.hpp"

namespace coheval::harness {

// Model kind tags used in checkpoint containers and on the command line.
namespace kind {
inline constexpr const char* kLc = "lc";
inline constexpr const char* kLcMul = "lc_mul";
inline constexpr const char* kAes = "aes";
inline constexpr const char* kJoint = "joint";
inline constexpr const char* kJointNoShare = "joint_no_share";
inline constexpr const char* kJointZeroScore = "joint_zero_score";
inline constexpr const char* kVecConcat = "vecconcat";
}  // namespace kind

Checkpoint lc_to_checkpoint(models::LcModel& model, const text::Vocab& vocab);
Checkpoint aes_to_checkpoint(models::AesModel& model,
                             const text::Vocab& vocab);
Checkpoint joint_to_checkpoint(
    models::JointModel& model, const text::Vocab& vocab,
    const std::string& kind_tag, const models::DetectionThreshold& threshold,
    const std::map<int, models::DetectionThreshold>& per_prompt_thresholds =
        {});
// The ridge container stores the fitted regression only; prediction
// additionally needs the two frozen extractor checkpoints, whose content
// hashes are recorded for verification.
Checkpoint ridge_to_checkpoint(const models::KernelRidgeModel& model,
                               const std::string& aes_ckpt_hash,
                               const std::string& lc_ckpt_hash);

// A deserialized model of any kind; exactly one of the model pointers is
// set, matching `kind`.
struct LoadedModel {
  std::string kind;
  text::Vocab vocab;
  std::shared_ptr<text::EmbeddingTable> embedding;
  std::shared_ptr<text::EmbeddingTable> lc_embedding;  // unshared joint only
  std::unique_ptr<models::LcModel> lc;
  std::unique_ptr<models::AesModel> aes;
  std::unique_ptr<models::JointModel> joint;
  std::unique_ptr<models::KernelRidgeModel> ridge;
  models::DetectionThreshold threshold;  // joint kinds
  std::map<int, models::DetectionThreshold> per_prompt_thresholds;
  std::string aes_ckpt_hash;  // vecconcat
  std::string lc_ckpt_hash;   // vecconcat
};

LoadedModel model_from_checkpoint(const Checkpoint& ckpt);

inline LoadedModel load_model(const std::string& path) {
  return model_from_checkpoint(load_checkpoint(path));
}

}  // namespace coheval::harness
