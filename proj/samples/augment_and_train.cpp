// samples/augment_and_train.cpp

// Copyright 2026  The cpcaug Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Draws augmented views for one window and runs a few contrastive steps on
// the built-in tone corpus.
//
//   augment_and_train [out_dir]

#include <filesystem>
#include <iostream>

#include "cpcaug/audio/wav.hpp"
#include "cpcaug/cpc/synthetic.hpp"
#include "cpcaug/cpc/trainer.hpp"
#include "cpcaug/cpc/views.hpp"

int main(int argc, char** argv) {
  using namespace cpcaug;
  const std::filesystem::path out = argc > 1 ? argv[1] : ".";
  std::filesystem::create_directories(out);
  try {
    const SyntheticCorpus corpus = make_synthetic_corpus({});
    const auto bank = make_synthetic_noise_bank(16000, 0, kDefaultNoiseBand);
    const EffectChainSpec spec = default_training_chain(bank);

    // Past-only views: the future half stays clean.
    const AudioBuffer window = corpus.train[0].audio;
    const auto views =
        make_views({window}, AugPlacement::kPastOnly, spec, RngStream(7, {kViewStream, 0}));
    std::cout << "past chain: " << to_json(*views[0].past_chain).dump() << "\n";
    write_wav(out / "clean.wav", window);
    write_wav(out / "past.wav", views[0].past);

    CpcConfig cfg = CpcConfig::tiny();
    cfg.window_seconds = 0.32;
    Trainer trainer(cfg, 0, std::make_shared<const std::vector<AudioBuffer>>(corpus.train_audio()),
                    spec, AugPlacement::kPastOnly, default_threads());
    for (int s = 0; s < 20; ++s) {
      const auto r = trainer.step();
      if (s % 5 == 0) std::cout << "step " << s << " loss " << r.loss << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "augment_and_train: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
