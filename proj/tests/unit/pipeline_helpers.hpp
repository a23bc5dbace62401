#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "bf/pipeline.hpp"

namespace testutil {

// Collects every part's blocks in shared storage that outlives the run.
struct Collected {
    std::mutex mutex;
    std::map<int, std::vector<bf::OutputBlock>> by_part;
    std::map<int, bf::PartInfo> info;
    std::map<int, int> finished;

    std::vector<bf::OutputBlock> part(int p) {
        std::lock_guard lock(mutex);
        return by_part[p];
    }
};

class CollectingSink : public bf::BeamSink {
  public:
    CollectingSink(std::shared_ptr<Collected> store, int part) : store_(std::move(store)), part_(part) {}
    void write(const bf::OutputBlock& block) override {
        std::lock_guard lock(store_->mutex);
        store_->by_part[part_].push_back(block);
    }
    void finish() override {
        std::lock_guard lock(store_->mutex);
        ++store_->finished[part_];
    }

  private:
    std::shared_ptr<Collected> store_;
    int part_;
};

inline bf::SinkFactory collect_into(std::shared_ptr<Collected> store) {
    return [store](const bf::PartInfo& info) -> std::unique_ptr<bf::BeamSink> {
        {
            std::lock_guard lock(store->mutex);
            store->info[info.part] = info;
        }
        return std::make_unique<CollectingSink>(store, info.part);
    };
}

// All delivered bytes, part by part and block by block.
inline std::vector<float> concat(Collected& c) {
    std::vector<float> out;
    std::lock_guard lock(c.mutex);
    for (auto& [p, blocks] : c.by_part)
        for (const auto& b : blocks)
            out.insert(out.end(), b.data.begin(), b.data.end());
    return out;
}

} // namespace testutil
